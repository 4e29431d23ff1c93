#pragma once

#include <stdexcept>
#include <string>

namespace c3 {

// Thrown when a numerical solve cannot produce a usable answer. `category()`
// is a stable machine-readable tag used by the CLI for exit diagnostics;
// `step` and `iteration` locate the failure inside horizon loops (-1 when not
// applicable).
class SolveFailure : public std::runtime_error {
 public:
  SolveFailure(std::string category, const std::string& message, int step = -1,
               int iteration = -1)
      : std::runtime_error(message),
        category_(std::move(category)),
        step_(step),
        iteration_(iteration) {}

  const std::string& category() const { return category_; }
  int step() const { return step_; }
  int iteration() const { return iteration_; }

 private:
  std::string category_;
  int step_;
  int iteration_;
};

}  // namespace c3
