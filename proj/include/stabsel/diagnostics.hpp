#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stabsel {

/// Collects non-fatal warnings. Not thread-safe; concurrent producers keep
/// their own instance and merge in a fixed order.
struct Diagnostics {
    std::vector<std::string> warnings;

    void warn(std::string message) { warnings.push_back(std::move(message)); }

    void merge(const Diagnostics& other) {
        warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
    }

    bool empty() const noexcept { return warnings.empty(); }
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag) diag->warn(std::move(message));
}

} // namespace stabsel
