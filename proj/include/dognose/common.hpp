#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dognose {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }

// Error taxonomy shared across modules. Each simulation error carries a
// stable code so the CLI can map failures to exit codes and name the
// offending module/step in its message.
enum class ErrorCode {
    DomainTooSmall,
    ResolutionTooCoarse,
    PortBlocked,
    CflViolation,
    ProjectionDiverged,
    StabilityViolation,
    EmptyTrace,
    DegenerateRun,
    BudgetExceeded,
    BadConfig,
};

class SimError : public std::runtime_error {
  public:
    SimError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DomainTooSmall: return "DomainTooSmall";
        case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
        case ErrorCode::PortBlocked: return "PortBlocked";
        case ErrorCode::CflViolation: return "CflViolation";
        case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
        case ErrorCode::StabilityViolation: return "StabilityViolation";
        case ErrorCode::EmptyTrace: return "EmptyTrace";
        case ErrorCode::DegenerateRun: return "DegenerateRun";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

[[noreturn]] inline void throw_sim_error(ErrorCode code, const std::string& what) {
    throw SimError(code, std::string(error_code_name(code)) + ": " + what);
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace dognose
