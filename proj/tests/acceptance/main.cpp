// Runs the synthetic acceptance criteria and prints one line per criterion.
// Usage: acceptance [--only 1,3,5] [--json report.json]

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "submarket/acceptance.hpp"
#include "submarket/figures.hpp"
#include "submarket/io.hpp"

int main(int argc, char** argv) {
  submarket::AcceptanceOptions options;
  options.progress = &std::cout;
  std::string json_path;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--only" && a + 1 < argc) {
      std::stringstream list(argv[++a]);
      std::string item;
      while (std::getline(list, item, ',')) options.only.push_back(std::stoi(item));
    } else if (arg == "--json" && a + 1 < argc) {
      json_path = argv[++a];
    } else {
      std::cerr << "usage: acceptance [--only 1,2,...] [--json path]\n";
      return 1;
    }
  }
  const auto results = submarket::run_acceptance(options);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::cout << (failed == 0 ? "ALL PASS" : "FAILED") << ": " << results.size() - failed << "/" << results.size()
            << " criteria\n";
  if (!json_path.empty()) submarket::write_file_atomic(json_path, submarket::dump(submarket::acceptance_json(results)));
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
