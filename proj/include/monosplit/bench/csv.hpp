#pragma once

// CSV output. Numbers use std::to_chars (shortest round-trip form), which is
// locale independent, so files are byte-identical across repeated runs.

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "monosplit/errors.hpp"
#include "monosplit/run.hpp"

namespace monosplit::bench {

/// A file could not be opened or written.
class IoError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kTraceHeader = "iter,step_norm,natural_residual,lyapunov_E,lyapunov_alpha";

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

inline void write_trace_csv(const std::vector<TraceRecord>& records, std::ostream& os) {
    os << kTraceHeader << '\n';
    for (const auto& r : records) {
        os << r.iter << ',' << format_number(r.step_norm) << ',' << format_number(r.natural_residual) << ','
           << format_optional(r.lyapunov_E) << ',' << format_optional(r.lyapunov_alpha) << '\n';
    }
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

template <class V>
void emit_trace_csv(const ConvergenceTrace<V>& trace, const std::string& path) {
    std::ostringstream ss;
    write_trace_csv(trace.records, ss);
    write_file(path, ss.str());
}

inline void emit_trace_csv(const std::vector<TraceRecord>& records, const std::string& path) {
    std::ostringstream ss;
    write_trace_csv(records, ss);
    write_file(path, ss.str());
}

} // namespace monosplit::bench
