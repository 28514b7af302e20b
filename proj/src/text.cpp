#include "fairflow/text.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace fairflow {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

namespace {

[[noreturn]] void bad(std::string_view s, std::string_view what) {
    throw std::invalid_argument("invalid " + std::string(what) + " '" + std::string(s) + "'");
}

template <class T>
T parse_whole(std::string_view raw, std::string_view what) {
    const auto s = trim(raw);
    T v{};
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;  // from_chars rejects a leading '+'
    const auto res = std::from_chars(first, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad(raw, what);
    return v;
}

}  // namespace

double parse_double(std::string_view s, std::string_view what) {
    return parse_whole<double>(s, what);
}

long long parse_int(std::string_view s, std::string_view what) {
    return parse_whole<long long>(s, what);
}

unsigned long long parse_uint(std::string_view s, std::string_view what) {
    if (!trim(s).empty() && trim(s).front() == '-') bad(s, what);
    return parse_whole<unsigned long long>(s, what);
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace fairflow
