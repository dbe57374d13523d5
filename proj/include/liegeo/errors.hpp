#pragma once

#include <stdexcept>
#include <string>

namespace liegeo {

// Error categories map to CLI exit codes: validation -> 2, numerical -> 3.
enum class ErrorKind { Validation, Numerical };

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what, ErrorKind kind)
        : std::runtime_error(code + ": " + what), code_(std::move(code)), kind_(kind) {}

    const std::string& code() const noexcept { return code_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string code_;
    ErrorKind kind_;
};

#define LIEGEO_ERROR_TYPE(Name, module, kind)                                  \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what)                                 \
            : Error(module "/" #Name, what, ErrorKind::kind) {}                \
    }

LIEGEO_ERROR_TYPE(NonUnitNormal, "lie_core", Validation);
LIEGEO_ERROR_TYPE(NondecodableQuadricPoint, "lie_core", Validation);
LIEGEO_ERROR_TYPE(InvalidGroupElement, "lie_core", Validation);
LIEGEO_ERROR_TYPE(SignAlignmentFailure, "lie_core", Numerical);

LIEGEO_ERROR_TYPE(NotCurvatureLineCoordinates, "surface_invariants", Validation);
LIEGEO_ERROR_TYPE(DegenerateSurface, "surface_invariants", Numerical);
LIEGEO_ERROR_TYPE(StalkCollapse, "surface_invariants", Numerical);
LIEGEO_ERROR_TYPE(IllConditionedCoframe, "surface_invariants", Numerical);
LIEGEO_ERROR_TYPE(UmbilicPoint, "surface_invariants", Numerical);
LIEGEO_ERROR_TYPE(SignatureFailure, "surface_invariants", Numerical);

LIEGEO_ERROR_TYPE(InsufficientOrder, "legendre_curves", Validation);
LIEGEO_ERROR_TYPE(FatnessFailure, "legendre_curves", Numerical);
LIEGEO_ERROR_TYPE(NotLinearlyFull, "legendre_curves", Numerical);
LIEGEO_ERROR_TYPE(NotPolarized, "legendre_curves", Numerical);
LIEGEO_ERROR_TYPE(StepFailure, "legendre_curves", Numerical);

LIEGEO_ERROR_TYPE(NotIntegralElement, "eds_engine", Validation);

LIEGEO_ERROR_TYPE(CharacteristicData, "cauchy_solver", Validation);
LIEGEO_ERROR_TYPE(OrderSolveFailure, "cauchy_solver", Numerical);
LIEGEO_ERROR_TYPE(WindowTooLarge, "cauchy_solver", Validation);

LIEGEO_ERROR_TYPE(ValidationError, "cli", Validation);

#undef LIEGEO_ERROR_TYPE

} // namespace liegeo
