#pragma once
#include <stdexcept>
#include <string>

namespace hlpicone {

// Malformed expression text. offset is a byte position into the input string.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& msg, std::size_t offset)
        : std::runtime_error(msg), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Evaluation-time domain failure (log of a non-positive value, division by zero, ...).
class eval_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A leading coefficient vanishes on the sampling grid, or a problem is otherwise
// unusable as posed.
class singular_coefficient_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive integration could not proceed. Carries the abscissa where it gave up.
class integration_error : public std::runtime_error {
public:
    integration_error(const std::string& msg, double where)
        : std::runtime_error(msg), where_(where) {}
    double where() const noexcept { return where_; }

private:
    double where_;
};

// Eigenvalue search failed: no bracket inside the scan range, or the Newton
// iteration did not converge within its budget.
class eigen_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Problem-file schema violation.
class problem_file_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An identity or theorem case is malformed (wrong input combination for the
// kind, fully excluded evaluation grid, ...).
class case_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hlpicone
