#pragma once
// Interpretable-space basis: an ordered set of representative points in the
// latent space. Point order defines coordinate order.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylespace/error.hpp"
#include "stylespace/vector_ops.hpp"

namespace stylespace {

enum class BasisSource { clustered, random, predefined_feature };

inline std::string_view to_string(BasisSource s) {
  switch (s) {
    case BasisSource::clustered: return "clustered";
    case BasisSource::random: return "random";
    case BasisSource::predefined_feature: return "predefined_feature";
  }
  return "clustered";
}

inline BasisSource parse_basis_source(std::string_view s) {
  if (s == "clustered") return BasisSource::clustered;
  if (s == "random") return BasisSource::random;
  if (s == "predefined_feature") return BasisSource::predefined_feature;
  throw SchemaError("unknown basis source '" + std::string(s) + "'");
}

struct RepresentativePoint {
  std::size_t point_id = 0;
  Vector centroid;
  std::vector<std::string> member_authors;
  std::vector<std::string> member_docs;
};

class InterpretableBasis {
 public:
  InterpretableBasis() = default;

  InterpretableBasis(BasisSource source, std::vector<RepresentativePoint> points)
      : source_(source), points_(std::move(points)) {
    if (points_.size() < 2) throw ComputeError("a basis needs at least 2 representative points");
    dim_ = points_.front().centroid.size();
    for (const auto& p : points_) {
      if (p.centroid.size() != dim_) throw ComputeError("basis centroids differ in dimension");
    }
  }

  BasisSource source() const noexcept { return source_; }
  std::size_t k() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<RepresentativePoint>& points() const noexcept { return points_; }
  const RepresentativePoint& operator[](std::size_t i) const { return points_[i]; }

 private:
  BasisSource source_ = BasisSource::clustered;
  std::size_t dim_ = 0;
  std::vector<RepresentativePoint> points_;
};

inline nlohmann::ordered_json basis_to_json(const InterpretableBasis& basis) {
  nlohmann::ordered_json out;
  out["source"] = std::string(to_string(basis.source()));
  out["dim"] = basis.dim();
  out["points"] = nlohmann::ordered_json::array();
  for (const auto& p : basis.points()) {
    nlohmann::ordered_json jp;
    jp["point_id"] = p.point_id;
    jp["centroid"] = p.centroid;
    jp["member_authors"] = p.member_authors;
    jp["member_docs"] = p.member_docs;
    out["points"].push_back(std::move(jp));
  }
  return out;
}

inline InterpretableBasis basis_from_json(const nlohmann::json& j) {
  try {
    std::vector<RepresentativePoint> points;
    for (const auto& jp : j.at("points")) {
      RepresentativePoint p;
      p.point_id = jp.at("point_id").get<std::size_t>();
      p.centroid = jp.at("centroid").get<Vector>();
      p.member_authors = jp.at("member_authors").get<std::vector<std::string>>();
      p.member_docs = jp.at("member_docs").get<std::vector<std::string>>();
      points.push_back(std::move(p));
    }
    InterpretableBasis basis(parse_basis_source(j.at("source").get<std::string>()),
                             std::move(points));
    if (basis.dim() != j.at("dim").get<std::size_t>()) {
      throw SchemaError("basis 'dim' disagrees with centroid length");
    }
    return basis;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("schema violation in basis file: ") + e.what());
  }
}

inline InterpretableBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("basis file " + path.string() + ": " + e.what());
  }
  return basis_from_json(j);
}

}  // namespace stylespace
