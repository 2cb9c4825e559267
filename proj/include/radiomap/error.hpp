#pragma once

#include <stdexcept>
#include <string>

namespace radiomap {

// All library failures surface as this type; messages name the failing
// stage or input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace radiomap
