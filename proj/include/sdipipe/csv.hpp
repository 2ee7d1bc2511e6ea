#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdipipe/error.hpp"

namespace sdipipe::csv {

// Split one CSV line in place. The schemas in this project never quote
// fields, so a plain comma split is sufficient. Trailing \r is stripped.
inline void split(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::optional<int64_t> parse_i64(std::string_view s) {
    int64_t v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

// Fixed-precision float formatting keeps every emitted file byte-stable
// across reruns.
inline void append_fixed(std::string& out, double v, int decimals) {
    char buf[64];
    int n = std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    out.append(buf, static_cast<size_t>(n));
}

inline std::string fixed(double v, int decimals) {
    std::string s;
    append_fixed(s, v, decimals);
    return s;
}

// Buffered line-oriented writer.
class Writer {
public:
    explicit Writer(const std::string& path) : path_(path), os_(path, std::ios::binary) {
        if (!os_) throw data_error("cannot open for writing: " + path);
        buf_.reserve(1 << 20);
    }
    ~Writer() { flush_quiet(); }

    void line(std::string_view s) {
        buf_.append(s);
        buf_.push_back('\n');
        if (buf_.size() > (1 << 20)) flush();
    }
    void flush() {
        os_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        buf_.clear();
        if (!os_) throw data_error("write failed: " + path_);
    }
    void close() {
        flush();
        os_.close();
    }

private:
    void flush_quiet() noexcept {
        try {
            if (os_.is_open()) flush();
        } catch (...) {
        }
    }
    std::string path_;
    std::ofstream os_;
    std::string buf_;
};

// Reads a whole file. Line iteration over a single buffer beats repeated
// getline calls on the multi-hundred-MB sighting feeds.
inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw data_error("cannot open: " + path);
    auto size = is.tellg();
    std::string content(static_cast<size_t>(size), '\0');
    is.seekg(0);
    is.read(content.data(), size);
    return content;
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
    size_t start = 0;
    while (start < content.size()) {
        size_t pos = content.find('\n', start);
        if (pos == std::string_view::npos) pos = content.size();
        fn(content.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace sdipipe::csv
