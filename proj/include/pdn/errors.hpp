#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdn {

/// Precondition violated: bad shapes, non-positive lengths, invalid structures.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or incompatible file contents.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Requested work exceeds a configured size guard.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during optimization.
class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::int64_t where)
        : std::runtime_error(what), where_(where) {}

    /// Layer index, batch index or epoch, depending on the raising site.
    std::int64_t where() const noexcept { return where_; }

private:
    std::int64_t where_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Artifacts that cannot be combined (model grid vs target grid, layer counts).
class IncompatibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pdn
