#pragma once

#include <stdexcept>
#include <string>

namespace sightline {

enum class ErrorKind {
    Validation,
    NotFound,
    EmptyInput,
    DegenerateGeometry,
    DimensionMismatch,
    DegenerateView,
    NightTime,
    InconsistentGesture,
    NoValidViewpoint,
    Io,
};

/// All engine failures surface as Error; `kind` maps to a CLI exit code.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    const char* kind_name() const noexcept {
        switch (kind_) {
            case ErrorKind::Validation: return "validation";
            case ErrorKind::NotFound: return "not_found";
            case ErrorKind::EmptyInput: return "empty_input";
            case ErrorKind::DegenerateGeometry: return "degenerate_geometry";
            case ErrorKind::DimensionMismatch: return "dimension_mismatch";
            case ErrorKind::DegenerateView: return "degenerate_view";
            case ErrorKind::NightTime: return "night_time";
            case ErrorKind::InconsistentGesture: return "inconsistent_gesture";
            case ErrorKind::NoValidViewpoint: return "no_valid_viewpoint";
            case ErrorKind::Io: return "io";
        }
        return "unknown";
    }

    /// Process exit code used by the CLI for this error class.
    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::Validation: return 2;
            case ErrorKind::NotFound: return 3;
            case ErrorKind::EmptyInput: return 2;
            case ErrorKind::DegenerateGeometry: return 2;
            case ErrorKind::DimensionMismatch: return 2;
            case ErrorKind::DegenerateView: return 4;
            case ErrorKind::NightTime: return 5;
            case ErrorKind::InconsistentGesture: return 2;
            case ErrorKind::NoValidViewpoint: return 7;
            case ErrorKind::Io: return 6;
        }
        return 1;
    }

  private:
    ErrorKind kind_;
};

}  // namespace sightline
