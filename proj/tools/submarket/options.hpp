#pragma once

// Option registration shared by all subcommands. Every option gets a
// SUBMARKET_<NAME> environment override and can be set from the JSON config
// file; precedence is flag > environment > config > built-in default.

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace submarket::cli {

/// Raised for bad invocations that CLI11 itself does not catch.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string env_name(const std::string& flag) {
  std::string out = "SUBMARKET_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class OptionSet {
 public:
  explicit OptionSet(CLI::App* app) : app_(app) {}

  CLI::App* app() const { return app_; }

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, var, help)->envname(env_name(name));
    entries_.push_back({name, opt, [&var] { return nlohmann::json(var); }});
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name, var, help)->envname(env_name(name));
    entries_.push_back({name, opt, [&var] { return nlohmann::json(var); }});
    return opt;
  }

  /// Marks an option as required once flags, environment and config have
  /// all been applied.
  CLI::Option* need(CLI::Option* opt) {
    required_.push_back(opt);
    return opt;
  }

  void check_required() const {
    for (const CLI::Option* opt : required_) {
      if (opt->count() == 0) throw UsageError(app_->get_name() + ": " + opt->get_name() + " is required");
    }
  }

  /// Fills options not given on the command line or in the environment from
  /// `values`. With `strict`, keys that name no option are a usage error.
  void apply_config(const nlohmann::json& values, bool strict) {
    for (const auto& [key, value] : values.items()) {
      if (value.is_object()) continue;
      const Entry* entry = find(key);
      if (!entry) {
        if (strict) throw UsageError("config: unknown option '" + key + "' for " + app_->get_name());
        continue;
      }
      if (entry->option->count() > 0) continue;
      entry->option->clear();
      if (value.is_array()) {
        for (const auto& item : value) entry->option->add_result(scalar_text(key, item));
      } else {
        entry->option->add_result(scalar_text(key, value));
      }
      entry->option->run_callback();
    }
  }

  nlohmann::json echo() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& e : entries_) out[e.name] = e.value();
    return out;
  }

  bool given(const std::string& name) const {
    const Entry* e = find(name);
    return e && e->option->count() > 0;
  }

 private:
  struct Entry {
    std::string name;
    CLI::Option* option;
    std::function<nlohmann::json()> value;
  };

  const Entry* find(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  static std::string scalar_text(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw UsageError("config: option '" + key + "' must be a string, number, boolean or array of them");
  }

  CLI::App* app_;
  std::vector<Entry> entries_;
  std::vector<const CLI::Option*> required_;
};

}  // namespace submarket::cli
