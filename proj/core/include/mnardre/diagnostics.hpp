#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mnardre {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the range an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or degenerate for the requested operation.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (overflow, non-finite values).
class NumericError : public Error {
 public:
  using Error::Error;
};

using WarningHandler = std::function<void(std::string_view)>;

/// Emits a warning through the installed handler (stderr by default) and
/// bumps the process-wide warning counter.
void warn(std::string_view message);

/// Installs a new handler and returns the previous one. Passing an empty
/// function silences warnings; they are still counted.
WarningHandler set_warning_handler(WarningHandler handler);

std::uint64_t warning_count();

/// Number of times a missingness probability was clamped to 1 - kPhiFloor.
std::uint64_t phi_clamp_count();
void note_phi_clamp();

}  // namespace mnardre
