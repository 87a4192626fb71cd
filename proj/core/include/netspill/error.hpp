#ifndef NETSPILL_ERROR_HPP
#define NETSPILL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace netspill {

// Pipeline errors carry the stage at which they occurred so callers
// (and the CLI error JSON) can report where a run failed.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace netspill

#endif
