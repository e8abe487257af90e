#pragma once

#include <stdexcept>
#include <string>

namespace streamforge {

/// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text: XML, attribute values, config lines.
class ParseError : public Error {
  public:
    explicit ParseError(const std::string& what) : Error("ParseError: " + what) {}
};

/// Structurally valid input that violates a model invariant.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& what) : Error("ValidationError: " + what) {}
};

/// A *Cfg attribute references a file that does not exist.
class MissingConfigError : public Error {
  public:
    explicit MissingConfigError(const std::string& what) : Error("MissingConfigError: " + what) {}
};

/// Config file uses structure outside the supported flat key-value subset.
class UnsupportedStructureError : public Error {
  public:
    explicit UnsupportedStructureError(const std::string& what)
        : Error("UnsupportedStructureError: " + what) {}
};

/// schedule() called with a timestamp behind the simulation clock.
class SchedulingInPastError : public Error {
  public:
    explicit SchedulingInPastError(const std::string& what)
        : Error("SchedulingInPastError: " + what) {}
};

/// An event handler threw; carries the event context.
class HandlerPanic : public Error {
  public:
    explicit HandlerPanic(const std::string& what) : Error("HandlerPanic: " + what) {}
};

/// Host pairs with no path between them.
class DisconnectedError : public Error {
  public:
    explicit DisconnectedError(const std::string& what) : Error("DisconnectedError: " + what) {}
};

class UnknownPortError : public Error {
  public:
    explicit UnknownPortError(const std::string& what) : Error("UnknownPortError: " + what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& what) : Error("IoError: " + what) {}
};

class SweepError : public Error {
  public:
    explicit SweepError(const std::string& what) : Error("SweepError: " + what) {}
};

}  // namespace streamforge
