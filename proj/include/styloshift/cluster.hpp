#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "styloshift/common.hpp"
#include "styloshift/stats.hpp"

namespace styloshift {

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

enum class Linkage { average, complete, ward };

inline Linkage linkage_from_string(const std::string& s) {
  if (s == "average") return Linkage::average;
  if (s == "complete") return Linkage::complete;
  if (s == "ward") return Linkage::ward;
  throw ParseError("unknown linkage: " + s);
}

inline std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
    case Linkage::ward: return "ward";
  }
  return "average";
}

struct Merge {
  // Node ids: 0..n-1 are leaves, n+k is the cluster created by merge k.
  std::size_t node_a = 0;
  std::size_t node_b = 0;
  double height = 0.0;
};

struct Dendrogram {
  std::vector<std::string> leaves;  // config ids, sorted
  std::vector<Merge> merges;        // exactly leaves.size() - 1 entries
  std::vector<std::size_t> leaf_order;  // display permutation of leaves
};

namespace detail {

inline double euclidean(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct ActiveCluster {
  std::size_t node_id;
  std::vector<std::size_t> members;  // leaf indices
  std::string label;                 // lexicographically smallest leaf id
};

// Linkage distance computed directly from the member point sets.
inline double cluster_distance(
    const ActiveCluster& a, const ActiveCluster& b,
    const std::vector<std::vector<double>>& points, Linkage linkage) {
  switch (linkage) {
    case Linkage::average: {
      double s = 0.0;
      for (std::size_t i : a.members)
        for (std::size_t j : b.members) s += euclidean(points[i], points[j]);
      return s / static_cast<double>(a.members.size() * b.members.size());
    }
    case Linkage::complete: {
      double mx = 0.0;
      for (std::size_t i : a.members)
        for (std::size_t j : b.members)
          mx = std::max(mx, euclidean(points[i], points[j]));
      return mx;
    }
    case Linkage::ward: {
      std::size_t dims = points[a.members[0]].size();
      std::vector<double> ca(dims, 0.0), cb(dims, 0.0);
      for (std::size_t i : a.members)
        for (std::size_t d = 0; d < dims; ++d) ca[d] += points[i][d];
      for (std::size_t j : b.members)
        for (std::size_t d = 0; d < dims; ++d) cb[d] += points[j][d];
      for (std::size_t d = 0; d < dims; ++d) {
        ca[d] /= static_cast<double>(a.members.size());
        cb[d] /= static_cast<double>(b.members.size());
      }
      double na = static_cast<double>(a.members.size());
      double nb = static_cast<double>(b.members.size());
      return std::sqrt(2.0 * na * nb / (na + nb)) * euclidean(ca, cb);
    }
  }
  return 0.0;
}

}  // namespace detail

// Agglomerative clustering over Euclidean distance. Ties are broken by
// the lexicographically smallest (label_a, label_b) pair, so the merge
// sequence is independent of input map ordering.
inline Dendrogram cluster_models(
    const std::map<std::string, std::vector<double>>& vectors,
    Linkage linkage = Linkage::average) {
  if (vectors.size() < 2)
    throw TooFewSamples("clustering needs at least 2 configs");
  Dendrogram dg;
  std::vector<std::vector<double>> points;
  for (const auto& [id, v] : vectors) {  // std::map: already sorted
    dg.leaves.push_back(id);
    points.push_back(v);
  }
  const std::size_t dims = points[0].size();
  for (const auto& p : points)
    if (p.size() != dims)
      throw DimensionMismatch("cluster vectors of unequal length");

  std::vector<detail::ActiveCluster> active;
  for (std::size_t i = 0; i < dg.leaves.size(); ++i)
    active.push_back({i, {i}, dg.leaves[i]});

  // node_id -> children, for the display ordering at the end
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> children;

  const std::size_t n = dg.leaves.size();
  while (active.size() > 1) {
    double best = 0.0;
    std::size_t bi = 0, bj = 1;
    bool have = false;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        double d =
            detail::cluster_distance(active[i], active[j], points, linkage);
        const auto& la =
            std::min(active[i].label, active[j].label);
        const auto& lb =
            std::max(active[i].label, active[j].label);
        const auto& ca = std::min(active[bi].label, active[bj].label);
        const auto& cb = std::max(active[bi].label, active[bj].label);
        if (!have || d < best ||
            (d == best && std::tie(la, lb) < std::tie(ca, cb))) {
          best = d;
          bi = i;
          bj = j;
          have = true;
        }
      }
    }
    std::size_t new_id = n + dg.merges.size();
    // orient so the smaller label is node_a
    detail::ActiveCluster &a = active[bi], &b = active[bj];
    if (b.label < a.label) std::swap(bi, bj);
    Merge m;
    m.node_a = active[bi].node_id;
    m.node_b = active[bj].node_id;
    m.height = best;
    dg.merges.push_back(m);
    children[new_id] = {m.node_a, m.node_b};

    detail::ActiveCluster merged;
    merged.node_id = new_id;
    merged.members = active[bi].members;
    merged.members.insert(merged.members.end(), active[bj].members.begin(),
                          active[bj].members.end());
    merged.label = std::min(active[bi].label, active[bj].label);
    if (bj < bi) std::swap(bi, bj);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(std::move(merged));
  }

  // Display order: depth-first from the root, node_a branch first.
  std::vector<std::size_t> stack = {active[0].node_id};
  while (!stack.empty()) {
    std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      dg.leaf_order.push_back(node);
    } else {
      auto [a, b] = children.at(node);
      stack.push_back(b);
      stack.push_back(a);
    }
  }
  return dg;
}

namespace detail {

inline void newick_node(const Dendrogram& dg, std::size_t node,
                        double parent_height, std::string& out) {
  const std::size_t n = dg.leaves.size();
  if (node < n) {
    out += dg.leaves[node];
    out += ':';
    out += format_real(parent_height, 6);
    return;
  }
  const Merge& m = dg.merges[node - n];
  out += '(';
  newick_node(dg, m.node_a, m.height, out);
  out += ',';
  newick_node(dg, m.node_b, m.height, out);
  out += "):";
  out += format_real(std::max(0.0, parent_height - m.height), 6);
}

}  // namespace detail

inline std::string to_newick(const Dendrogram& dg) {
  std::string out;
  std::size_t root = dg.leaves.size() + dg.merges.size() - 1;
  const Merge& m = dg.merges.back();
  out += '(';
  detail::newick_node(dg, m.node_a, m.height, out);
  out += ',';
  detail::newick_node(dg, m.node_b, m.height, out);
  out += ");";
  (void)root;
  return out;
}

inline nlohmann::json dendrogram_to_json(const Dendrogram& dg) {
  nlohmann::json j;
  j["leaves"] = dg.leaves;
  auto& merges = j["merges"] = nlohmann::json::array();
  for (const auto& m : dg.merges)
    merges.push_back({{"a", m.node_a}, {"b", m.node_b}, {"height", m.height}});
  j["leaf_order"] = dg.leaf_order;
  j["newick"] = to_newick(dg);
  return j;
}

inline Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  Dendrogram dg;
  dg.leaves = j.value("leaves", std::vector<std::string>{});
  for (const auto& m : j.value("merges", nlohmann::json::array()))
    dg.merges.push_back({m.value("a", std::size_t{0}),
                         m.value("b", std::size_t{0}),
                         m.value("height", 0.0)});
  dg.leaf_order = j.value("leaf_order", std::vector<std::size_t>{});
  return dg;
}

}  // namespace styloshift
