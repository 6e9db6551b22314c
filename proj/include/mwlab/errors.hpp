#ifndef MWLAB_ERRORS_HPP
#define MWLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mwlab {

// Validation problems (bad inputs, contract violations). CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// A solver could not certify a required sandwich. CLI exit code 3.
class CertificationError : public std::runtime_error {
public:
    CertificationError(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
    throw ValidationError(code, what);
}

} // namespace mwlab

#endif
