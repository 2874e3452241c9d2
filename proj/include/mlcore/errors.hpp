#ifndef MLCORE_ERRORS_HPP
#define MLCORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mlcore {

// Raised for problems with external data: missing files, malformed CSV
// cells, ragged rows.  Callers that map errors to process exit codes treat
// DataError as a data failure and std::invalid_argument as a usage failure.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mlcore

#endif  // MLCORE_ERRORS_HPP
