#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "styloshift/common.hpp"
#include "styloshift/features.hpp"

namespace styloshift {

inline constexpr const char* kDimensionModelFormat = "styloshift-dims/1";

class MissingFeature : public Error {
public:
  using Error::Error;
};

class BadSd : public Error {
public:
  using Error::Error;
};

class EmptyDimension : public Error {
public:
  using Error::Error;
};

class ModelMismatch : public Error {
public:
  using Error::Error;
};

struct DimensionDef {
  std::string dim_id;
  std::string positive_pole;
  std::string negative_pole;
};

struct Membership {
  std::string dim_id;
  int sign = +1;  // +1 positive pole, -1 negative pole
};

struct DimensionModel {
  std::string model_id;
  std::string language;
  std::vector<DimensionDef> dimensions;
  std::map<std::string, double> mean;  // feature_id -> mean_f
  std::map<std::string, double> sd;    // feature_id -> sd_f (> 0)
  std::map<std::string, std::vector<Membership>> memberships;

  std::vector<std::string> feature_ids() const {
    std::vector<std::string> out;
    out.reserve(mean.size());
    for (const auto& [f, _] : mean) out.push_back(f);
    return out;
  }

  std::size_t dim_index(const std::string& dim_id) const {
    for (std::size_t i = 0; i < dimensions.size(); ++i)
      if (dimensions[i].dim_id == dim_id) return i;
    throw ParseError("membership references undeclared dimension '" +
                     dim_id + "'");
  }
};

struct DimensionScores {
  std::string model_id;
  std::string chunk_id;
  std::vector<double> v;
};

inline std::map<std::string, double> standardize(const FeatureVector& fv,
                                                 const DimensionModel& m) {
  std::map<std::string, double> z;
  for (const auto& [f, mean_f] : m.mean) {
    auto it = fv.values.find(f);
    if (it == fv.values.end())
      throw MissingFeature("feature vector lacks '" + f + "' required by " +
                           m.model_id);
    z[f] = (it->second - mean_f) / m.sd.at(f);
  }
  return z;
}

// Dimension score = sum of z over positive-pole members minus sum over
// negative-pole members.
inline DimensionScores score_dimensions(const FeatureVector& fv,
                                        const DimensionModel& m,
                                        const std::string& chunk_id = "") {
  auto z = standardize(fv, m);
  DimensionScores out;
  out.model_id = m.model_id;
  out.chunk_id = chunk_id;
  out.v.assign(m.dimensions.size(), 0.0);
  std::vector<std::size_t> members_per_dim(m.dimensions.size(), 0);
  for (const auto& [f, mems] : m.memberships) {
    for (const auto& mem : mems) {
      std::size_t d = m.dim_index(mem.dim_id);
      out.v[d] += mem.sign * z.at(f);
      ++members_per_dim[d];
    }
  }
  for (std::size_t d = 0; d < m.dimensions.size(); ++d)
    if (members_per_dim[d] == 0)
      throw EmptyDimension("dimension '" + m.dimensions[d].dim_id +
                           "' has no member features");
  return out;
}

inline DimensionModel load_dimension_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != kDimensionModelFormat)
    throw ParseError(path + ": missing or unsupported format tag");
  DimensionModel m;
  m.model_id = j.value("model_id", "");
  m.language = j.value("language", "");
  for (const auto& d : j.value("dimensions", nlohmann::json::array())) {
    DimensionDef def;
    def.dim_id = d.value("dim_id", "");
    def.positive_pole = d.value("positive_pole", "");
    def.negative_pole = d.value("negative_pole", "");
    if (def.dim_id.empty())
      throw ParseError(path + ": dimension without dim_id");
    m.dimensions.push_back(std::move(def));
  }
  if (m.dimensions.empty()) throw ParseError(path + ": no dimensions");
  for (const auto& f : j.value("features", nlohmann::json::array())) {
    std::string id = f.value("id", "");
    if (id.empty()) throw ParseError(path + ": feature entry without id");
    if (m.mean.count(id))
      throw ParseError(path + ": duplicate feature '" + id + "'");
    double mean_f = f.value("mean", 0.0);
    double sd_f = f.value("sd", 0.0);
    if (!(sd_f > 0.0))
      throw BadSd(path + ": feature '" + id + "' has sd <= 0");
    m.mean[id] = mean_f;
    m.sd[id] = sd_f;
    std::vector<Membership> mems;
    for (const auto& mm : f.value("memberships", nlohmann::json::array())) {
      Membership mem;
      mem.dim_id = mm.value("dim", "");
      mem.sign = mm.value("sign", +1);
      if (mem.sign != 1 && mem.sign != -1)
        throw ParseError(path + ": feature '" + id + "' sign must be +-1");
      m.dim_index(mem.dim_id);  // validates reference
      mems.push_back(std::move(mem));
    }
    if (!mems.empty()) m.memberships[id] = std::move(mems);
  }
  return m;
}

}  // namespace styloshift
