#pragma once

#include <stdexcept>
#include <string>

namespace mfst {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an adaptive solve would need more states than the cap allows.
// The sampler catches this and maps the particle to log-likelihood -inf.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IntegratorError : std::runtime_error {
  explicit IntegratorError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SamplerError : std::runtime_error {
  explicit SamplerError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mfst
