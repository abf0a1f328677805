#pragma once

#include <stdexcept>
#include <string>

namespace formation {

// Exception hierarchy. Every error raised by the library derives from Error so
// that the CLI can map failures onto exit codes in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct DegenerateBearing : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ShapeError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct VersionError : Error {
  using Error::Error;
};

struct NotReady : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace formation
