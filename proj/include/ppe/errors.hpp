#pragma once

#include <stdexcept>
#include <string>

namespace ppe {

// Exception families map one-to-one onto CLI exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyncError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitGeneric = 1,
  kExitConfig = 2,
  kExitSingular = 3,
  kExitIo = 4,
  kExitSync = 5,
};

}  // namespace ppe
