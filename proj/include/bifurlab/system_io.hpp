#pragma once

// JSON system descriptions:
//
//   {"schema_version": 1, "lambda": 1, "q": 2,
//    "w": [[0, 1]],
//    "F": [],
//    "G": [{"k": 1, "terms": [[0, 1, -0.5], [0, 0, 1.5]]}]}
//
// or a preset with overrides:
//
//   {"schema_version": 1, "preset": "example1",
//    "params": {"lambda": 0, "B": -0.6, "C": 1.5, "kappa": 1}}

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bifurlab/model.hpp"

namespace bifurlab {

inline constexpr int kSchemaVersion = 1;

/// Input that does not match the schema. `field` is a JSON-pointer-like
/// path; `line` is set for syntax errors.
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(const std::string& field, const std::string& what, std::optional<int> line = {})
      : std::invalid_argument(format(field, what, line)), field_(field), line_(line) {}
  [[nodiscard]] const std::string& field() const { return field_; }
  [[nodiscard]] std::optional<int> line() const { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& what,
                            std::optional<int> line);
  std::string field_;
  std::optional<int> line_;
};

struct SystemDescription {
  PerturbedSystem system;
  std::optional<std::string> preset;
  nlohmann::json preset_params;  ///< effective preset parameters (null without a preset)
};

/// Throws SchemaError for schema violations and ModelError for systems the
/// model rejects (including "unperturbed system" unless
/// `allow_unperturbed`; simulation needs no profile and accepts it).
[[nodiscard]] SystemDescription parse_system(const nlohmann::json& j,
                                             bool allow_unperturbed = false);
[[nodiscard]] SystemDescription parse_system_text(const std::string& text,
                                                  bool allow_unperturbed = false);
[[nodiscard]] SystemDescription load_system(const std::string& path,
                                            bool allow_unperturbed = false);

/// Explicit (preset-free) serialization; parse_system inverts it exactly.
[[nodiscard]] nlohmann::json system_to_json(const PerturbedSystem& sys);

/// Preset system from a name and a parameter object (missing keys take the
/// preset defaults).
[[nodiscard]] SystemDescription make_preset(const std::string& name, const nlohmann::json& params);

}  // namespace bifurlab
