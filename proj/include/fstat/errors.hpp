#pragma once

#include <stdexcept>
#include <string>

namespace fse {

// Shape/dimension mismatch between tensors, models, or files.
struct shape_error : std::runtime_error {
  explicit shape_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Training diverged (non-finite loss or gradients).
struct train_error : std::runtime_error {
  explicit train_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fse
