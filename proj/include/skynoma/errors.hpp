#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace skynoma {

/// Raised when a scenario or plan violates a parameter invariant.
/// Carries every violation found, each prefixed with its field path.
class InvalidConfig : public std::runtime_error {
public:
    explicit InvalidConfig(const std::string& message)
        : std::runtime_error(message), violations_{message} {}

    explicit InvalidConfig(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Zero-length link; path loss is undefined.
class DegenerateLink : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace skynoma
