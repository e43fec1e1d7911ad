#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gifs/gifs_system.hpp"
#include "gifs/linalg.hpp"
#include "gifs/markov.hpp"

namespace gifs::io {

inline constexpr int kSchemaVersion = 1;

struct MapSpec {
  std::vector<std::vector<double>> matrices;  // m row-major d x d arrays
  std::vector<double> offset;

  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

/// File form of a GIFS (optionally with probabilities).
struct SystemSpec {
  int schema_version = kSchemaVersion;
  std::size_t dim = 0;
  std::size_t order = 0;
  std::vector<MapSpec> maps;
  std::optional<std::vector<double>> probs;
  nlohmann::json metadata = nlohmann::json::object();

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Every problem found in a spec document, not just the first.
class SpecError : public std::invalid_argument {
 public:
  explicit SpecError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid system spec:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }

  std::vector<std::string> violations_;
};

namespace detail {

inline std::optional<std::size_t> positive_int(const nlohmann::json& doc, const char* key,
                                               std::vector<std::string>& errs) {
  if (!doc.contains(key)) {
    errs.push_back(std::string("missing field '") + key + "'");
    return std::nullopt;
  }
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    errs.push_back(std::string("'") + key + "' must be a positive integer");
    return std::nullopt;
  }
  return static_cast<std::size_t>(v.get<long long>());
}

inline std::optional<std::vector<double>> number_array(const nlohmann::json& v, const std::string& where,
                                                       std::vector<std::string>& errs) {
  if (!v.is_array()) {
    errs.push_back(where + " must be an array of numbers");
    return std::nullopt;
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      errs.push_back(where + " must contain only finite numbers");
      return std::nullopt;
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

/// Parses and validates a JSON system description:
///
///   {"schema_version": 1, "dim": d, "order": m,
///    "maps": [{"matrices": [[...d*d...], ...m...], "offset": [...d...]}],
///    "probs": [...n...], "metadata": {...}}
///
/// Throws SpecError listing every violation.
inline SystemSpec parse_spec(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError({std::string("malformed JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw SpecError({"top level must be a JSON object"});

  std::vector<std::string> errs;
  SystemSpec spec;
  for (const auto& [key, value] : doc.items())
    if (key != "schema_version" && key != "dim" && key != "order" && key != "maps" && key != "probs" &&
        key != "metadata")
      errs.push_back("unknown field '" + key + "'");

  if (!doc.contains("schema_version"))
    errs.push_back("missing field 'schema_version'");
  else if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<long long>() != kSchemaVersion)
    errs.push_back("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");

  const auto dim = detail::positive_int(doc, "dim", errs);
  const auto order = detail::positive_int(doc, "order", errs);
  if (dim) spec.dim = *dim;
  if (order) spec.order = *order;

  if (!doc.contains("maps") || !doc["maps"].is_array() || doc["maps"].empty()) {
    errs.push_back("'maps' must be a nonempty array");
  } else {
    const auto& maps = doc["maps"];
    for (std::size_t j = 0; j < maps.size(); ++j) {
      const std::string at = "maps[" + std::to_string(j) + "]";
      const auto& mj = maps[j];
      if (!mj.is_object() || !mj.contains("matrices") || !mj.contains("offset")) {
        errs.push_back(at + " needs 'matrices' and 'offset'");
        continue;
      }
      MapSpec ms;
      bool ok = true;
      if (!mj["matrices"].is_array()) {
        errs.push_back(at + ".matrices must be an array");
        ok = false;
      } else {
        if (order && mj["matrices"].size() != *order) {
          errs.push_back(at + " has " + std::to_string(mj["matrices"].size()) + " matrices but order is " +
                         std::to_string(*order));
          ok = false;
        }
        for (std::size_t i = 0; i < mj["matrices"].size(); ++i) {
          const std::string mat_at = at + ".matrices[" + std::to_string(i) + "]";
          auto arr = detail::number_array(mj["matrices"][i], mat_at, errs);
          if (!arr) {
            ok = false;
            continue;
          }
          if (dim && arr->size() != *dim * *dim) {
            errs.push_back(mat_at + " has " + std::to_string(arr->size()) + " entries, expected " +
                           std::to_string(*dim * *dim));
            ok = false;
          }
          ms.matrices.push_back(std::move(*arr));
        }
      }
      auto off = detail::number_array(mj["offset"], at + ".offset", errs);
      if (!off) {
        ok = false;
      } else {
        if (dim && off->size() != *dim) {
          errs.push_back(at + ".offset has " + std::to_string(off->size()) + " entries, expected " +
                         std::to_string(*dim));
          ok = false;
        }
        ms.offset = std::move(*off);
      }
      if (ok && dim && order) {
        double lip_sum = 0.0;
        for (const auto& flat : ms.matrices) lip_sum += lipschitz_upper(Matrix(*dim, *dim, flat));
        if (!(lip_sum < 1.0))
          errs.push_back(at + " is not contractive: sum of argument Lipschitz constants = " + std::to_string(lip_sum));
      }
      spec.maps.push_back(std::move(ms));
    }
  }

  if (doc.contains("probs")) {
    auto probs = detail::number_array(doc["probs"], "probs", errs);
    if (probs) {
      if (doc.contains("maps") && doc["maps"].is_array() && probs->size() != doc["maps"].size())
        errs.push_back("probs has " + std::to_string(probs->size()) + " entries but there are " +
                       std::to_string(doc["maps"].size()) + " maps");
      bool positive = true;
      for (double q : *probs) positive = positive && q > 0.0;
      if (!positive) errs.push_back("probs must be strictly positive");
      const double s = compensated_sum(*probs);
      if (std::abs(s - 1.0) > kWeightSumTolerance) errs.push_back("probs sum to " + std::to_string(s) + ", not 1");
      spec.probs = std::move(*probs);
    }
  }
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object())
      errs.push_back("'metadata' must be an object");
    else
      spec.metadata = doc["metadata"];
  }
  if (!errs.empty()) throw SpecError(std::move(errs));
  return spec;
}

inline std::string serialize_spec(const SystemSpec& spec) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = spec.schema_version;
  doc["dim"] = spec.dim;
  doc["order"] = spec.order;
  doc["maps"] = nlohmann::ordered_json::array();
  for (const auto& m : spec.maps) doc["maps"].push_back({{"matrices", m.matrices}, {"offset", m.offset}});
  if (spec.probs) doc["probs"] = *spec.probs;
  if (!spec.metadata.empty()) doc["metadata"] = nlohmann::ordered_json::parse(spec.metadata.dump());
  return doc.dump(2) + "\n";
}

inline GifsSystem to_system(const SystemSpec& spec) {
  std::vector<MultiAffineMap> maps;
  for (const auto& m : spec.maps) {
    std::vector<Matrix> mats;
    for (const auto& flat : m.matrices) mats.emplace_back(spec.dim, spec.dim, flat);
    maps.emplace_back(std::move(mats), m.offset);
  }
  return GifsSystem(std::move(maps));
}

/// Uses equal probabilities when none are given.
inline GifsP to_gifsp(const SystemSpec& spec) {
  if (spec.probs) return GifsP(to_system(spec), *spec.probs);
  return GifsP::uniform(to_system(spec));
}

}  // namespace gifs::io
