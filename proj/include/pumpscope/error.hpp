#pragma once

#include <stdexcept>
#include <string>

namespace pumpscope {

enum class ErrorKind {
  Parse,
  Validation,
  Duplicate,
  Network,
  HttpStatus,
  MalformedPayload,
  NoAccumulation,
  ZeroVolume,
  NoPumpData,
  EmptyInput,
  Config,
  Io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Duplicate: return "duplicate";
    case ErrorKind::Network: return "network";
    case ErrorKind::HttpStatus: return "http_status";
    case ErrorKind::MalformedPayload: return "malformed_payload";
    case ErrorKind::NoAccumulation: return "no_accumulation";
    case ErrorKind::ZeroVolume: return "zero_volume";
    case ErrorKind::NoPumpData: return "no_pump_window_data";
    case ErrorKind::EmptyInput: return "empty_input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace pumpscope
