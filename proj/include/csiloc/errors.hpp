#pragma once

#include <stdexcept>
#include <string>

namespace csiloc {

enum class Errc {
    invalid_input,
    invalid_config,
    data_format,
    corrupt_record,
    incomplete_survey,
    degenerate_input,
    invalid_bounds,
    no_peak,
    numeric,
};

// Single exception type carrying a machine-readable category. The CLI maps
// categories onto process exit codes (usage=1, data=2, numeric=3).
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

inline int exit_code_for(Errc code) {
    switch (code) {
        case Errc::invalid_input:
        case Errc::invalid_config: return 1;
        case Errc::data_format:
        case Errc::corrupt_record:
        case Errc::incomplete_survey: return 2;
        default: return 3;
    }
}

} // namespace csiloc
