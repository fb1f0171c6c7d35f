#ifndef GCNREF_ERRORS_HPP
#define GCNREF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gcnref {

// Bad input data or configuration: maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : ValidationError {
    explicit IoError(const std::string& msg) : ValidationError(msg) {}
};

// Graph degeneracies get their own exit codes so scripted sweeps can
// tell "this tau produced no ROI" from "the input files are broken".
struct EmptyRoiError : ValidationError {
    explicit EmptyRoiError(const std::string& msg) : ValidationError(msg) {}
};

struct DegenerateLabelsError : ValidationError {
    explicit DegenerateLabelsError(const std::string& msg) : ValidationError(msg) {}
};

}  // namespace gcnref

#endif
