#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clca {

// Base of every error raised by the library. `kind()` is a stable name used
// by the CLI and the HTTP layer to map errors onto exit codes and statuses.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define CLCA_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

CLCA_DEFINE_ERROR(ProviderUnavailable)
CLCA_DEFINE_ERROR(IoError)
CLCA_DEFINE_ERROR(EmptyDataset)
CLCA_DEFINE_ERROR(EpisodeFinished)
CLCA_DEFINE_ERROR(NonFiniteAction)
CLCA_DEFINE_ERROR(DimensionMismatch)
CLCA_DEFINE_ERROR(NonFiniteLoss)
CLCA_DEFINE_ERROR(FormatError)
CLCA_DEFINE_ERROR(EmptyMessage)
CLCA_DEFINE_ERROR(InvalidArgument)

#undef CLCA_DEFINE_ERROR

// Provider replied, but the reply does not fit the expected schema.
class MalformedProviderOutput : public Error {
 public:
  MalformedProviderOutput(const std::string& message, std::string raw)
      : Error("MalformedProviderOutput", message), raw_(std::move(raw)) {}

  const std::string& raw_text() const { return raw_; }

 private:
  std::string raw_;
};

// Invalid dataset record. `line()` is 1-based; 0 when not file-backed.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& message, std::size_t line = 0)
      : Error("SchemaError",
              line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace clca
