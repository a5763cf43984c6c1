#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace benchirt {

/// Malformed or inconsistent input (files, flags, matrix shapes).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two inputs that must share labels do not.
class IdMismatchError : public std::runtime_error {
 public:
  IdMismatchError(const std::string& what, std::vector<std::string> ids)
      : std::runtime_error(what), ids_(std::move(ids)) {}

  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::vector<std::string> ids_;
};

}  // namespace benchirt
