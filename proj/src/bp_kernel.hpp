#pragma once

// Per-node message update shared by the sequential and OpenMP sweeps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "submarket/bp.hpp"
#include "submarket/errors.hpp"

namespace submarket::detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NodeScratch {
  std::vector<double> v;       // per incoming slot and group: sum_s omega_rs mu^{k->i}_s, scaled to max 1
  std::vector<double> log_v;   // same in log space, filled only on the fallback path
  std::vector<double> mant;    // running product of nonzero v per group
  std::vector<int> expo;       // binary exponent carried out of mant
  std::vector<double> sum_log;
  std::vector<int> zeros;      // incoming slots with v == 0
  std::vector<double> base;
  std::vector<double> work;
  std::vector<double> fresh;

  void reserve(std::size_t k) {
    mant.resize(k);
    expo.resize(k);
    sum_log.resize(k);
    zeros.resize(k);
    base.resize(k);
    work.resize(k);
    fresh.resize(k);
  }
};

/// Normalizes exp(logs) into out. Returns false if every entry is -inf.
inline bool normalize_logs(std::span<const double> logs, std::span<double> out) {
  double peak = kNegInf;
  for (double l : logs) peak = std::max(peak, l);
  if (peak == kNegInf) return false;
  double total = 0.0;
  for (std::size_t r = 0; r < logs.size(); ++r) {
    out[r] = std::exp(logs[r] - peak);
    total += out[r];
  }
  for (double& x : out) x /= total;
  return true;
}

/// Writes the damped message into dst and returns its largest change.
inline double store_message(std::span<const double> fresh, const double* old, double* dst, double damping) {
  double change = 0.0;
  for (std::size_t r = 0; r < fresh.size(); ++r) {
    const double updated = (1.0 - damping) * fresh[r] + damping * old[r];
    change = std::max(change, std::abs(updated - old[r]));
    dst[r] = updated;
  }
  return change;
}

[[noreturn]] inline void fail_edge(const Graph& g, NodeId i, std::size_t slot) {
  throw NumericalError("belief propagation: renormalization failed on edge " + g.id(i) + " -> " +
                       g.id(g.slot_target(slot)));
}

// Cavity products in log space. Used when the linear path would lose groups
// to underflow.
inline double update_node_logs(const Graph& g, NodeId i, std::span<const double> node_log, const double* src,
                               double* dst, std::span<double> q_row, double damping, NodeScratch& scr,
                               std::size_t k) {
  const std::size_t begin = g.slot_begin(i);
  const std::size_t deg = g.slot_end(i) - begin;
  scr.log_v.resize(deg * k);
  std::fill(scr.sum_log.begin(), scr.sum_log.end(), 0.0);
  for (std::size_t t = 0; t < deg * k; ++t) {
    const double v = scr.v[t];
    scr.log_v[t] = v > 0.0 ? std::log(v) : kNegInf;
    if (v > 0.0) scr.sum_log[t % k] += scr.log_v[t];
  }
  for (std::size_t r = 0; r < k; ++r) {
    scr.work[r] = scr.zeros[r] > 0 ? kNegInf : node_log[r] + scr.sum_log[r];
  }
  if (!normalize_logs(scr.work, q_row)) {
    throw NumericalError("belief propagation: marginal of node " + g.id(i) + " has no admissible group");
  }
  double change = 0.0;
  for (std::size_t t = 0; t < deg; ++t) {
    const std::size_t slot = begin + t;
    const double* lv = scr.log_v.data() + t * k;
    for (std::size_t r = 0; r < k; ++r) {
      const bool excluded_zero = lv[r] == kNegInf;
      const int zeros = scr.zeros[r] - (excluded_zero ? 1 : 0);
      scr.work[r] = zeros > 0 ? kNegInf : node_log[r] + scr.sum_log[r] - (excluded_zero ? 0.0 : lv[r]);
    }
    if (!normalize_logs(scr.work, scr.fresh)) fail_edge(g, i, slot);
    change = std::max(change, store_message(scr.fresh, src + slot * k, dst + slot * k, damping));
  }
  return change;
}

/// Updates all outgoing messages of node i and its marginal q_i.
///
/// Incoming messages and the previous value of i's own messages are read from
/// `src`; results go to `dst`. With src == dst this is an in-place update (own
/// slots are never read as incoming). `node_log[r]` is log gamma_r - d_i h_r.
/// Returns the largest absolute change among i's messages.
inline double update_node(const Graph& g, const BlockModelParams& params, NodeId i,
                          std::span<const double> node_log, const double* src, double* dst,
                          std::span<double> q_row, double damping, NodeScratch& scr) {
  const std::size_t k = params.k();
  const std::size_t begin = g.slot_begin(i);
  const std::size_t deg = g.slot_end(i) - begin;
  scr.v.resize(deg * k);
  std::fill(scr.mant.begin(), scr.mant.end(), 1.0);
  std::fill(scr.expo.begin(), scr.expo.end(), 0);
  std::fill(scr.zeros.begin(), scr.zeros.end(), 0);

  // Each incoming factor is scaled by its largest entry; a common factor over
  // r cancels in every normalization below.
  const auto omega = params.omega.data();
  for (std::size_t t = 0; t < deg; ++t) {
    const double* in = src + g.reverse_slot(begin + t) * k;
    double* v = scr.v.data() + t * k;
    double peak = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      double acc = 0.0;
      const double* w = omega.data() + r * k;
      for (std::size_t s = 0; s < k; ++s) acc += w[s] * in[s];
      v[r] = acc;
      peak = std::max(peak, acc);
    }
    if (!(peak > 0.0)) {
      std::fill(v, v + k, 0.0);
      for (std::size_t r = 0; r < k; ++r) ++scr.zeros[r];
      continue;
    }
    const double inv_peak = 1.0 / peak;
    for (std::size_t r = 0; r < k; ++r) {
      v[r] *= inv_peak;
      if (v[r] > 0.0) {
        scr.mant[r] *= v[r];
        if (scr.mant[r] < 0x1p-512) {
          int e = 0;
          scr.mant[r] = std::frexp(scr.mant[r], &e);
          scr.expo[r] += e;
        }
      } else {
        ++scr.zeros[r];
      }
    }
  }

  // log of the full product for every admissible group
  double peak = kNegInf;
  for (std::size_t r = 0; r < k; ++r) {
    scr.work[r] = scr.zeros[r] > 1 ? kNegInf
                                   : node_log[r] + std::log(scr.mant[r]) + scr.expo[r] * std::numbers::ln2;
    peak = std::max(peak, scr.work[r]);
  }
  if (peak == kNegInf) {
    throw NumericalError("belief propagation: marginal of node " + g.id(i) + " has no admissible group");
  }
  // base_r = prior times the product of nonzero factors, relative to the peak;
  // a group far below the peak could be revived by dividing out one factor,
  // which the linear path cannot represent
  bool linear = true;
  for (std::size_t r = 0; r < k; ++r) {
    const double rel = scr.work[r] - peak;
    if (scr.work[r] != kNegInf && rel < -600.0) linear = false;
    scr.base[r] = scr.work[r] == kNegInf ? 0.0 : std::exp(rel);
  }
  if (!linear) return update_node_logs(g, i, node_log, src, dst, q_row, damping, scr, k);

  double total = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    q_row[r] = scr.zeros[r] > 0 ? 0.0 : scr.base[r];
    total += q_row[r];
  }
  if (!(total > 0.0)) {
    throw NumericalError("belief propagation: marginal of node " + g.id(i) + " has no admissible group");
  }
  for (double& x : q_row) x /= total;

  double change = 0.0;
  for (std::size_t t = 0; t < deg; ++t) {
    const std::size_t slot = begin + t;
    const double* v = scr.v.data() + t * k;
    double norm = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      double x;
      if (v[r] > 0.0) {
        x = scr.zeros[r] > 0 ? 0.0 : scr.base[r] / v[r];
      } else {
        x = scr.zeros[r] > 1 ? 0.0 : scr.base[r];
      }
      scr.fresh[r] = x;
      norm += x;
    }
    if (!(norm > 0.0)) fail_edge(g, i, slot);
    const double inv_norm = 1.0 / norm;
    for (double& x : scr.fresh) x *= inv_norm;
    change = std::max(change, store_message(scr.fresh, src + slot * k, dst + slot * k, damping));
  }
  return change;
}

/// log gamma_r - d_i h_r for every r.
inline void node_log_prior(const BlockModelParams& params, std::span<const double> field, double degree,
                           std::span<double> out) {
  for (std::size_t r = 0; r < params.k(); ++r) {
    out[r] = params.gamma[r] > 0.0 ? std::log(params.gamma[r]) - degree * field[r] : kNegInf;
  }
}

/// Adds d_i * omega * (q_new - q_old) to the field after node i moved.
inline void shift_field(const BlockModelParams& params, double degree, std::span<const double> q_old,
                        std::span<const double> q_new, std::span<double> field) {
  const std::size_t k = params.k();
  for (std::size_t s = 0; s < k; ++s) {
    const double delta = degree * (q_new[s] - q_old[s]);
    if (delta == 0.0) continue;
    for (std::size_t r = 0; r < k; ++r) field[r] += params.omega(r, s) * delta;
  }
}

// Both sweeps keep `field` in step with q1 as nodes are updated.
double sweep_sequential(const Graph& g, const BlockModelParams& params, BpState& state,
                        std::span<double> field, double damping);
double sweep_parallel(const Graph& g, const BlockModelParams& params, BpState& state,
                      std::span<double> field, double damping);

}  // namespace submarket::detail
