#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "styloshift/common.hpp"
#include "styloshift/dimensions.hpp"

namespace styloshift {

class TooFewSamples : public Error {
public:
  using Error::Error;
};

struct RngSeed {
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based substream derivation: every (seed, stream, counter)
// triple yields an independent deterministic generator state.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
  return splitmix64(splitmix64(seed ^ (stream * 0x9e3779b97f4a7c15ull)) ^
                    counter);
}

// Small deterministic PRNG (xorshift-star family) so resampling does not
// depend on libstdc++ distribution internals.
class Prng {
public:
  explicit Prng(std::uint64_t seed) : state_(splitmix64(seed | 1)) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dull;
  }

  // Uniform index in [0, n) via fixed-point multiply (no modulo bias
  // concerns at these n, and bit-stable across platforms).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Standard normal via Box-Muller on 53-bit uniforms.
  double normal() {
    double u1 = (next() >> 11) * 0x1.0p-53;
    double u2 = (next() >> 11) * 0x1.0p-53;
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586 * u2);
  }

private:
  std::uint64_t state_;
};

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Nearest-rank percentile on a pre-sorted vector.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto idx = static_cast<std::size_t>(std::llround(pos));
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  return sorted[idx];
}

}  // namespace detail

struct ShiftSample {
  std::string doc_id;
  std::string genre;
  std::vector<double> delta_v;  // reference minus generated, per dimension
  std::vector<double> i;        // part2 minus part1 of the human text
};

// Elementwise difference of two score vectors on the same model.
inline std::vector<double> shift(const DimensionScores& v_orig2,
                                 const DimensionScores& v_other) {
  if (v_orig2.model_id != v_other.model_id)
    throw ModelMismatch("score vectors from different models: " +
                        v_orig2.model_id + " vs " + v_other.model_id);
  if (v_orig2.v.size() != v_other.v.size())
    throw ModelMismatch("score vectors of different lengths");
  std::vector<double> out(v_orig2.v.size());
  for (std::size_t d = 0; d < out.size(); ++d)
    out[d] = v_orig2.v[d] - v_other.v[d];
  return out;
}

// SD of the resampled-mean distribution: draw n with replacement,
// take the mean, repeat `iters` times.
inline double bootstrap_se(const std::vector<double>& samples,
                           std::size_t iters, RngSeed seed) {
  if (samples.size() < 2)
    throw TooFewSamples("bootstrap_se needs at least 2 samples");
  if (iters < 1) throw TooFewSamples("bootstrap_se needs iters >= 1");
  const std::size_t n = samples.size();
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    detail::Prng rng(detail::substream(seed.seed, 0x5e5e, k));
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += samples[rng.index(n)];
    double m = s / static_cast<double>(n);
    sum += m;
    sumsq += m * m;
  }
  double mbar = sum / static_cast<double>(iters);
  double var = sumsq / static_cast<double>(iters) - mbar * mbar;
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

// Two-sided bootstrap p-value for mean == 0: fraction of resampled means
// on the opposite side of 0, doubled, floored at 1/iters, capped at 1.
inline double bootstrap_p_value(double observed_mean,
                                const std::vector<double>& resampled_means) {
  if (resampled_means.empty()) return 1.0;
  if (observed_mean == 0.0) return 1.0;
  std::size_t crossings = 0;
  for (double m : resampled_means) {
    if ((observed_mean > 0.0 && m <= 0.0) ||
        (observed_mean < 0.0 && m >= 0.0))
      ++crossings;
  }
  double p = 2.0 * static_cast<double>(crossings) /
             static_cast<double>(resampled_means.size());
  double floor = 1.0 / static_cast<double>(resampled_means.size());
  return std::min(1.0, std::max(p, floor));
}

inline bool significance(double observed_mean,
                         const std::vector<double>& resampled_means,
                         std::size_t m_tests) {
  double p = bootstrap_p_value(observed_mean, resampled_means);
  return p < 0.05 / static_cast<double>(m_tests);
}

struct BenchmarkParams {
  std::size_t iters = 10000;
  std::size_t inner_iters = 200;  // SE(I) re-estimation inside each draw
  RngSeed seed;
  std::size_t m_tests = 1;  // Bonferroni divisor (configs x dimensions)
};

struct BenchmarkResult {
  std::string config_id;
  std::size_t n_docs = 0;
  std::vector<double> mean_delta;
  std::vector<double> se_i;
  std::vector<double> b;
  std::vector<double> b_ci_low;
  std::vector<double> b_ci_high;
  std::vector<double> p_value;
  std::vector<bool> significant;
  std::vector<bool> normalizable;  // false when SE(I_d) == 0
  double B = 0.0;
  double B_ci_low = 0.0;
  double B_ci_high = 0.0;
};

// Shared human-baseline SE(I_d), computed once per corpus and reused by
// every model config of a run.
inline std::vector<double> baseline_se(const std::vector<ShiftSample>& samples,
                                       std::size_t iters, RngSeed seed) {
  if (samples.size() < 2)
    throw TooFewSamples("baseline_se needs at least 2 documents");
  std::size_t dims = samples[0].i.size();
  std::vector<double> out(dims, 0.0);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.i[d]);
    out[d] = bootstrap_se(xs, iters, RngSeed{detail::substream(
                                         seed.seed, 0xba5e, d)});
  }
  return out;
}

// Per-dimension normalized shift b_d = mean(delta_v_d) / SE(I_d) and
// scalar B = ||b||, with percentile CIs from joint document resampling:
// each draw picks documents with replacement and recomputes both the
// mean shift and the baseline SE on the drawn set.
inline BenchmarkResult benchmark(
    const std::string& config_id, const std::vector<ShiftSample>& shifts,
    const BenchmarkParams& params,
    const std::vector<double>* shared_se_i = nullptr) {
  if (shifts.size() < 2)
    throw TooFewSamples("benchmark needs at least 2 documents");
  const std::size_t n = shifts.size();
  const std::size_t dims = shifts[0].delta_v.size();
  for (const auto& s : shifts)
    if (s.delta_v.size() != dims || s.i.size() != dims)
      throw ModelMismatch("inconsistent dimension counts in shift samples");

  BenchmarkResult r;
  r.config_id = config_id;
  r.n_docs = n;
  r.mean_delta.assign(dims, 0.0);
  r.se_i.assign(dims, 0.0);
  r.b.assign(dims, 0.0);
  r.normalizable.assign(dims, true);

  for (const auto& s : shifts)
    for (std::size_t d = 0; d < dims; ++d) r.mean_delta[d] += s.delta_v[d];
  for (std::size_t d = 0; d < dims; ++d)
    r.mean_delta[d] /= static_cast<double>(n);

  if (shared_se_i) {
    if (shared_se_i->size() != dims)
      throw ModelMismatch("shared SE vector has wrong dimension count");
    r.se_i = *shared_se_i;
  } else {
    r.se_i = baseline_se(shifts, params.iters, params.seed);
  }

  for (std::size_t d = 0; d < dims; ++d) {
    if (r.se_i[d] > 0.0) {
      r.b[d] = r.mean_delta[d] / r.se_i[d];
    } else {
      r.normalizable[d] = false;
      r.b[d] = 0.0;
    }
  }
  double norm = 0.0;
  for (std::size_t d = 0; d < dims; ++d)
    if (r.normalizable[d]) norm += r.b[d] * r.b[d];
  r.B = std::sqrt(norm);

  // Joint resampling of documents.
  std::vector<std::vector<double>> b_draws(dims);
  std::vector<std::vector<double>> mean_draws(dims);
  std::vector<double> norm_draws;
  for (std::size_t d = 0; d < dims; ++d) {
    b_draws[d].reserve(params.iters);
    mean_draws[d].reserve(params.iters);
  }
  norm_draws.reserve(params.iters);
  std::vector<std::size_t> idx(n);
  std::vector<double> drawn_i(n);
  for (std::size_t k = 0; k < params.iters; ++k) {
    detail::Prng rng(detail::substream(params.seed.seed, 0xd0c5, k));
    for (std::size_t j = 0; j < n; ++j) idx[j] = rng.index(n);
    double nrm = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      double md = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        md += shifts[idx[j]].delta_v[d];
        drawn_i[j] = shifts[idx[j]].i[d];
      }
      md /= static_cast<double>(n);
      mean_draws[d].push_back(md);
      double se;
      try {
        se = bootstrap_se(drawn_i, params.inner_iters,
                          RngSeed{detail::substream(
                              params.seed.seed, 0x1e5e, k * dims + d)});
      } catch (const TooFewSamples&) {
        se = 0.0;
      }
      if (se <= 0.0) se = r.se_i[d];  // degenerate draw: fall back
      double bd = se > 0.0 ? md / se : 0.0;
      b_draws[d].push_back(bd);
      if (r.normalizable[d]) nrm += bd * bd;
    }
    norm_draws.push_back(std::sqrt(nrm));
  }

  r.b_ci_low.assign(dims, 0.0);
  r.b_ci_high.assign(dims, 0.0);
  r.p_value.assign(dims, 1.0);
  r.significant.assign(dims, false);
  for (std::size_t d = 0; d < dims; ++d) {
    r.p_value[d] = bootstrap_p_value(r.mean_delta[d], mean_draws[d]);
    r.significant[d] =
        r.p_value[d] < 0.05 / static_cast<double>(params.m_tests);
    std::sort(b_draws[d].begin(), b_draws[d].end());
    r.b_ci_low[d] = detail::percentile(b_draws[d], 0.025);
    r.b_ci_high[d] = detail::percentile(b_draws[d], 0.975);
    // percentile CI can fall just off the point estimate; keep it inside
    r.b_ci_low[d] = std::min(r.b_ci_low[d], r.b[d]);
    r.b_ci_high[d] = std::max(r.b_ci_high[d], r.b[d]);
  }
  std::sort(norm_draws.begin(), norm_draws.end());
  r.B_ci_low = std::min(detail::percentile(norm_draws, 0.025), r.B);
  r.B_ci_high = std::max(detail::percentile(norm_draws, 0.975), r.B);
  return r;
}

struct HumanBaseline {
  std::size_t n_docs = 0;
  std::vector<double> mean_i;
  std::vector<double> se_i;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> p_value;
  std::vector<bool> significant;
};

// Same machinery applied to the within-text instability i instead of the
// model shift: reports how much human texts drift between their halves.
inline HumanBaseline human_baseline(const std::vector<ShiftSample>& samples,
                                    const BenchmarkParams& params) {
  if (samples.size() < 2)
    throw TooFewSamples("human_baseline needs at least 2 documents");
  const std::size_t n = samples.size();
  const std::size_t dims = samples[0].i.size();
  HumanBaseline hb;
  hb.n_docs = n;
  hb.mean_i.assign(dims, 0.0);
  for (const auto& s : samples)
    for (std::size_t d = 0; d < dims; ++d) hb.mean_i[d] += s.i[d];
  for (std::size_t d = 0; d < dims; ++d)
    hb.mean_i[d] /= static_cast<double>(n);
  hb.se_i = baseline_se(samples, params.iters, params.seed);

  std::vector<std::vector<double>> draws(dims);
  for (std::size_t k = 0; k < params.iters; ++k) {
    detail::Prng rng(detail::substream(params.seed.seed, 0x4ba5, k));
    std::vector<std::size_t> idx(n);
    for (std::size_t j = 0; j < n; ++j) idx[j] = rng.index(n);
    for (std::size_t d = 0; d < dims; ++d) {
      double m = 0.0;
      for (std::size_t j = 0; j < n; ++j) m += samples[idx[j]].i[d];
      draws[d].push_back(m / static_cast<double>(n));
    }
  }
  hb.ci_low.assign(dims, 0.0);
  hb.ci_high.assign(dims, 0.0);
  hb.p_value.assign(dims, 1.0);
  hb.significant.assign(dims, false);
  for (std::size_t d = 0; d < dims; ++d) {
    hb.p_value[d] = bootstrap_p_value(hb.mean_i[d], draws[d]);
    hb.significant[d] =
        hb.p_value[d] < 0.05 / static_cast<double>(params.m_tests);
    std::sort(draws[d].begin(), draws[d].end());
    hb.ci_low[d] = std::min(detail::percentile(draws[d], 0.025), hb.mean_i[d]);
    hb.ci_high[d] =
        std::max(detail::percentile(draws[d], 0.975), hb.mean_i[d]);
  }
  return hb;
}

// Tabular export: one row per (config, dimension) plus a B row per
// config. Tab-separated, fixed column order.
inline std::string results_to_tsv(const std::vector<BenchmarkResult>& results,
                                  const std::vector<std::string>& dim_ids) {
  std::string out =
      "config_id\tdim_id\tmean_delta\tse_i\tb\tci_low\tci_high\t"
      "significant\n";
  for (const auto& r : results) {
    for (std::size_t d = 0; d < dim_ids.size(); ++d) {
      out += r.config_id + "\t" + dim_ids[d] + "\t" +
             format_real(r.mean_delta[d]) + "\t" + format_real(r.se_i[d]) +
             "\t" + format_real(r.b[d]) + "\t" + format_real(r.b_ci_low[d]) +
             "\t" + format_real(r.b_ci_high[d]) + "\t" +
             (r.significant[d] ? "1" : "0") + "\n";
    }
    out += r.config_id + "\tB\t\t\t" + format_real(r.B) + "\t" +
           format_real(r.B_ci_low) + "\t" + format_real(r.B_ci_high) +
           "\t\n";
  }
  return out;
}

inline nlohmann::json result_to_json(const BenchmarkResult& r,
                                     const std::vector<std::string>& dim_ids) {
  nlohmann::json j;
  j["config_id"] = r.config_id;
  j["n_docs"] = r.n_docs;
  j["B"] = r.B;
  j["B_ci"] = {r.B_ci_low, r.B_ci_high};
  auto& dims = j["dimensions"] = nlohmann::json::array();
  for (std::size_t d = 0; d < dim_ids.size(); ++d) {
    dims.push_back({{"dim_id", dim_ids[d]},
                    {"mean_delta", r.mean_delta[d]},
                    {"se_i", r.se_i[d]},
                    {"b", r.b[d]},
                    {"ci", {r.b_ci_low[d], r.b_ci_high[d]}},
                    {"p_value", r.p_value[d]},
                    {"significant", static_cast<bool>(r.significant[d])},
                    {"normalizable", static_cast<bool>(r.normalizable[d])}});
  }
  return j;
}

inline BenchmarkResult result_from_json(const nlohmann::json& j) {
  BenchmarkResult r;
  r.config_id = j.value("config_id", "");
  r.n_docs = j.value("n_docs", std::size_t{0});
  r.B = j.value("B", 0.0);
  if (j.contains("B_ci")) {
    r.B_ci_low = j["B_ci"][0].get<double>();
    r.B_ci_high = j["B_ci"][1].get<double>();
  }
  for (const auto& d : j.value("dimensions", nlohmann::json::array())) {
    r.mean_delta.push_back(d.value("mean_delta", 0.0));
    r.se_i.push_back(d.value("se_i", 0.0));
    r.b.push_back(d.value("b", 0.0));
    r.b_ci_low.push_back(d["ci"][0].get<double>());
    r.b_ci_high.push_back(d["ci"][1].get<double>());
    r.p_value.push_back(d.value("p_value", 1.0));
    r.significant.push_back(d.value("significant", false));
    r.normalizable.push_back(d.value("normalizable", true));
  }
  return r;
}

}  // namespace styloshift
