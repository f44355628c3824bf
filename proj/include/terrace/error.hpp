#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace terrace {

/// Every domain failure raised by the library. `kind()` is the stable error
/// name (e.g. "SnapFailure") that the CLI prints verbatim.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& detail)
        : std::runtime_error(kind + ": " + detail), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

namespace detail {

[[noreturn]] inline void fail(std::string_view kind, const std::string& detail) {
    throw Error(std::string(kind), detail);
}

}  // namespace detail

}  // namespace terrace
