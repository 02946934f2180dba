#include "fraclab/json_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

#include "fraclab/errors.hpp"

namespace fraclab::jsonio {

std::string format_double(double v) {
    if (!std::isfinite(v)) throw PreconditionError("non-finite value in serialized output");
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    if (res.ec != std::errc()) throw PreconditionError("double formatting failed");
    return std::string(buf, res.ptr);
}

namespace {

void dump_rec(const json& j, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::null:
            out += "null";
            break;
        case json::value_t::boolean:
            out += j.get<bool>() ? "true" : "false";
            break;
        case json::value_t::number_integer:
            out += std::to_string(j.get<std::int64_t>());
            break;
        case json::value_t::number_unsigned:
            out += std::to_string(j.get<std::uint64_t>());
            break;
        case json::value_t::number_float:
            out += format_double(j.get<double>());
            break;
        case json::value_t::string:
            out += json(j.get<std::string>()).dump();
            break;
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_rec(el, out, depth + 1);
            }
            out += "\n" + pad + "]";
            break;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + json(it.key()).dump() + ": ";
                dump_rec(it.value(), out, depth + 1);
            }
            out += "\n" + pad + "}";
            break;
        }
        default:
            throw PreconditionError("unsupported JSON value type in canonical dump");
    }
}

}  // namespace

std::string canonical_dump(const json& j) {
    std::string out;
    dump_rec(j, out, 0);
    out += "\n";
    return out;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, canonical_dump(j));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write file: " + path);
    out << text;
    if (!out) throw ArgumentError("write failed: " + path);
}

}  // namespace fraclab::jsonio
