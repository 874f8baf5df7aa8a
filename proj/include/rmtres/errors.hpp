#pragma once

#include <stdexcept>
#include <string>

namespace rmtres {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied something the library cannot work with (bad shape, flag,
/// file). The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure did not produce a usable answer. The CLI maps these
/// to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

#define RMTRES_DEFINE_ERROR(Name, Base)          \
    class Name : public Base {                   \
    public:                                      \
        using Base::Base;                        \
    }

RMTRES_DEFINE_ERROR(InvalidMatrix, InputError);
RMTRES_DEFINE_ERROR(InvalidShape, InputError);
RMTRES_DEFINE_ERROR(InvalidSpec, InputError);
RMTRES_DEFINE_ERROR(InvalidView, InputError);
RMTRES_DEFINE_ERROR(InvalidConfig, InputError);
RMTRES_DEFINE_ERROR(InvalidInput, InputError);
RMTRES_DEFINE_ERROR(InvalidSize, InputError);
RMTRES_DEFINE_ERROR(ZeroVariance, InputError);
RMTRES_DEFINE_ERROR(TruncatedFile, InputError);
RMTRES_DEFINE_ERROR(UnknownExperiment, InputError);

RMTRES_DEFINE_ERROR(DegenerateSpectrum, NumericalError);
RMTRES_DEFINE_ERROR(InsufficientViews, NumericalError);

#undef RMTRES_DEFINE_ERROR

/// Malformed PGM header; carries the byte offset where parsing stopped.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, std::size_t offset)
        : InputError(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// The eta-transform fixed point did not settle within the iteration budget.
class ConvergenceFailure : public NumericalError {
public:
    ConvergenceFailure(const std::string& what, double residual)
        : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace rmtres
