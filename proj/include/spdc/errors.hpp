#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfWindow : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StepTooCoarse : public Error {
 public:
  using Error::Error;
};

class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

class NoPeak : public Error {
 public:
  using Error::Error;
};

}  // namespace spdc
