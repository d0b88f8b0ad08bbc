#pragma once

#include <stdexcept>
#include <string>

namespace flownet {

/// Unreadable or structurally malformed input file.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A model or configuration invariant does not hold. The message names the
/// offending field or element.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Time integration aborted. Carries the time and node where it happened.
class SimulationError : public std::runtime_error {
public:
  SimulationError(const std::string& what, double time, std::string node)
      : std::runtime_error(what), time_(time), node_(std::move(node)) {}

  double time() const { return time_; }
  const std::string& node() const { return node_; }

private:
  double time_;
  std::string node_;
};

}  // namespace flownet
