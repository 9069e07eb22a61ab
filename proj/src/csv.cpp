#include "evsom/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evsom::csv {

namespace {

std::string context(const File& f, int line) {
    return f.path.string() + ":" + std::to_string(line);
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

File read_any(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    File f;
    f.path = path;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            f.header = split_line(line);
            continue;
        }
        if (line.empty() || line == "\r") continue;
        f.rows.push_back(Row{line_no, split_line(line)});
    }
    if (line_no == 0) throw std::runtime_error(path.string() + ": empty file");
    return f;
}

File read(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    File f = read_any(path);
    if (f.header != expected_header) {
        std::string want;
        for (std::size_t i = 0; i < expected_header.size(); ++i) {
            if (i) want += ",";
            want += expected_header[i];
        }
        throw std::runtime_error(path.string() + ":1: unexpected header (expected '" + want + "')");
    }
    for (const Row& r : f.rows) {
        if (r.fields.size() != expected_header.size()) {
            throw std::runtime_error(context(f, r.line) + ": expected " +
                                     std::to_string(expected_header.size()) + " fields, got " +
                                     std::to_string(r.fields.size()));
        }
    }
    return f;
}

void fail(const File& f, const Row& r, const std::string& message) {
    throw std::runtime_error(context(f, r.line) + ": " + message);
}

double parse_double(const File& f, const Row& r, int field) {
    const std::string& s = r.fields.at(static_cast<std::size_t>(field));
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
        fail(f, r, "invalid number '" + s + "'");
    }
    return v;
}

int parse_int(const File& f, const Row& r, int field) {
    const std::string& s = r.fields.at(static_cast<std::size_t>(field));
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
        fail(f, r, "invalid integer '" + s + "'");
    }
    return static_cast<int>(v);
}

Date parse_date(const File& f, const Row& r, int field) {
    try {
        return Date::parse(r.fields.at(static_cast<std::size_t>(field)));
    } catch (const std::exception& e) {
        fail(f, r, e.what());
    }
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_short(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

}  // namespace evsom::csv
