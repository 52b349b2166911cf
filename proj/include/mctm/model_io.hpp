#ifndef MCTM_MODEL_IO_HPP
#define MCTM_MODEL_IO_HPP

#include "mctm/dataset.hpp"
#include "mctm/estimation.hpp"

#include <string>
#include <vector>

namespace mctm {

inline constexpr int kModelSchemaVersion = 1;

struct DataFingerprint {
  int rows = 0;
  int responses = 0;
  int covariates = 0;
  std::string hash;  // FNV-1a 64 over column names and values, hex

  friend bool operator==(const DataFingerprint&, const DataFingerprint&) = default;
};

DataFingerprint fingerprint(const Dataset& data);

/// Everything needed to answer distribution queries without the data.
struct ModelDocument {
  FittedModel model;
  std::vector<std::string> response_names;
  std::vector<std::string> covariate_names;
  Vector covariate_min;
  Vector covariate_max;
  Vector covariate_mean;
  DataFingerprint data;
};

ModelDocument make_document(const FittedModel& model, const Dataset& data);

/// JSON text. Doubles are written in shortest round-trip form.
std::string serialize(const ModelDocument& doc);
/// Strict parse: unknown keys, missing keys and other schema versions are errors (InputError).
ModelDocument parse_model_document(const std::string& text);

void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

}  // namespace mctm

#endif
