#pragma once

#include <stdexcept>
#include <string>

namespace hdt {

/// Parameter outside the physically meaningful or representable range.
class RangeError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Overflow, failed tabulation, or any other numerical breakdown.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent scenario configuration. `key()` names the
/// offending entry when one can be identified.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace hdt
