#include "monoglm_cli/json_writer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace monoglm::cli {

namespace {

void write(const nlohmann::ordered_json& v, std::ostringstream& out, int indent, int depth) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (v.type()) {
    case nlohmann::json::value_t::object: {
        if (v.empty()) {
            out << "{}";
            return;
        }
        out << '{';
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out << ',';
            first = false;
            newline(depth + 1);
            out << nlohmann::json(it.key()).dump() << (indent < 0 ? ":" : ": ");
            write(it.value(), out, indent, depth + 1);
        }
        newline(depth);
        out << '}';
        return;
    }
    case nlohmann::json::value_t::array: {
        if (v.empty()) {
            out << "[]";
            return;
        }
        out << '[';
        bool first = true;
        for (const auto& e : v) {
            if (!first) out << ',';
            first = false;
            newline(depth + 1);
            write(e, out, indent, depth + 1);
        }
        newline(depth);
        out << ']';
        return;
    }
    case nlohmann::json::value_t::number_float: {
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            out << "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        out << buf;
        return;
    }
    default:
        out << v.dump();
    }
}

} // namespace

std::string to_json_text(const nlohmann::ordered_json& value, int indent) {
    std::ostringstream out;
    write(value, out, indent, 0);
    out << '\n';
    return out.str();
}

} // namespace monoglm::cli
