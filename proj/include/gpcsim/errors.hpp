#pragma once

// Error types shared by every gpcsim module. All derive from gpcsim::Error so
// callers (the CLI in particular) can map them to exit codes in one place.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpcsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid distribution parameters, or a point outside a bounded support.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Integer count (basis size, grid size, sparse-grid count) does not fit.
class OverflowError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

/// A grid is too large to enumerate; use streamed node access instead.
class BudgetError : public Error {
public:
    BudgetError(std::size_t requested, std::size_t budget)
        : Error("grid of " + std::to_string(requested) + " nodes exceeds enumeration budget of " +
                std::to_string(budget) + "; use streamed access (TensorGrid::node(j))"),
          requested(requested), budget(budget) {}
    std::size_t requested;
    std::size_t budget;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, double cond)
        : Error(what + " (condition estimate " + std::to_string(cond) + ")"), cond_estimate(cond) {}
    double cond_estimate;
};

class SelectionError : public Error {
public:
    SelectionError(std::size_t reached, std::size_t wanted, double beta)
        : Error("testing-node selection accepted only " + std::to_string(reached) + " of " +
                std::to_string(wanted) + " nodes (last beta " + std::to_string(beta) + ")"),
          reached(reached), wanted(wanted), beta(beta) {}
    std::size_t reached;
    std::size_t wanted;
    double beta;
};

struct Diagnostic {
    int line = 0;
    int column = 0;
    std::string message;
};

class ParseError : public Error {
public:
    explicit ParseError(std::vector<Diagnostic> diags)
        : Error(format(diags)), diagnostics(std::move(diags)) {}
    std::vector<Diagnostic> diagnostics;

private:
    static std::string format(const std::vector<Diagnostic>& diags) {
        std::string out;
        for (const auto& d : diags) {
            if (!out.empty()) out += '\n';
            out += std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
        }
        return out;
    }
};

/// Device model produced a non-finite value; the Newton layer should shorten the step.
class EvaluationError : public Error {
public:
    using Error::Error;
};

class DcFailure : public Error {
public:
    DcFailure(const std::string& what, double residual)
        : Error(what + " (last residual norm " + std::to_string(residual) + ")"), residual_norm(residual) {}
    double residual_norm;
};

class TransientFailure : public Error {
public:
    TransientFailure(const std::string& what, double t)
        : Error(what + " at t=" + std::to_string(t)), time(t) {}
    double time;
};

} // namespace gpcsim
