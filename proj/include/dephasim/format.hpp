#pragma once

#include <cstdio>
#include <string>

namespace dephasim {

inline constexpr const char* kCsvSchemaHeader = "# dephasim-schema v1";

// Shortest round-trippable decimal form; keeps emitted files byte-stable.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == x) {
        for (int prec = 1; prec <= 16; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, x);
            std::sscanf(shorter, "%lg", &back);
            if (back == x)
                return shorter;
        }
    }
    return buf;
}

}  // namespace dephasim
