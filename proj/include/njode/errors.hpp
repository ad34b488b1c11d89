#pragma once

#include <stdexcept>
#include <string>

namespace njode {

// Error taxonomy shared across the library. Everything derives from
// std::runtime_error so the CLI can map any failure to a machine-readable
// report with a stable "kind" string.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GenerationError : std::runtime_error {
  explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InferenceError : std::runtime_error {
  explicit InferenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingError : std::runtime_error {
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Stable identifier for the error JSON emitted by the CLI.
inline const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const UsageError*>(&e)) return "usage";
  if (dynamic_cast<const GenerationError*>(&e)) return "generation";
  if (dynamic_cast<const InferenceError*>(&e)) return "inference";
  if (dynamic_cast<const TrainingError*>(&e)) return "training";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  return "internal";
}

}  // namespace njode
