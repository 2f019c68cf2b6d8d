#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "brar/common.hpp"

namespace brar {

// RFC 4180 quoting: a field is quoted only when it contains a comma, quote,
// or line break; embedded quotes double.
inline std::string csv_escape(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (const char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Emits one report: comment lines, then comma-separated rows with LF endings.
// Floats print with 17 significant digits. Open file streams in binary mode
// so the LF convention holds on every platform.
class csv_writer {
  public:
    explicit csv_writer(std::ostream& os) : os_(&os) {}

    void comment(std::string_view text) {
        *os_ << "# " << text << '\n';
        check();
    }

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        (write_field(fields, first), ...);
        *os_ << '\n';
        check();
    }

    // Dynamic-width rows: fields arrive preformatted, quoting still applies.
    void row(const std::vector<std::string>& fields) {
        bool first = true;
        for (const std::string& f : fields) {
            if (!first) *os_ << ',';
            first = false;
            *os_ << csv_escape(f);
        }
        *os_ << '\n';
        check();
    }

  private:
    template <class T>
    void write_field(const T& value, bool& first) {
        if (!first) *os_ << ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            *os_ << format_double(value);
        } else if constexpr (std::is_integral_v<T>) {
            *os_ << +value;
        } else {
            *os_ << csv_escape(value);
        }
    }

    void check() const {
        if (!os_->good()) throw io_error("csv_writer: stream write failed");
    }

    std::ostream* os_;
};

// Provenance line carried by every report file: engine version, a hash of
// the effective configuration, and the tolerances the numbers were computed
// under.
struct report_meta {
    std::string config_hash;
    std::vector<std::pair<std::string, double>> tolerances;
};

inline void write_report_header(csv_writer& w, const report_meta& meta) {
    std::string line = "engine=";
    line += engine_version;
    line += " config=";
    line += meta.config_hash;
    for (const auto& [name, value] : meta.tolerances) {
        line += ' ';
        line += name;
        line += '=';
        line += format_double(value);
    }
    w.comment(line);
}

}  // namespace brar
