#pragma once

#include <stdexcept>
#include <string>

namespace gamm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid mechanism or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset files missing, malformed, or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// External imputer plugin failed, timed out, or violated the protocol.
class PluginError : public Error {
 public:
  using Error::Error;
};

}  // namespace gamm
