#include "nembrane/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nembrane/errors.hpp"

namespace nembrane {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << origin << ":" << lineno << ": expected key = value, got \"" << stripped
                << "\"";
            throw ParseError(msg.str());
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << origin << ":" << lineno << ": empty key";
            throw ParseError(msg.str());
        }
        if (cfg.values.count(key) != 0) {
            std::ostringstream msg;
            msg << origin << ":" << lineno << ": duplicate key \"" << key << "\"";
            throw ParseError(msg.str());
        }
        cfg.values[key] = value;
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

bool RunConfig::has(const std::string& key) const { return values.count(key) != 0; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    const char* text = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(text, &end);
    if (end == text || *end != '\0') {
        throw ParseError("config key \"" + key + "\": not a number: \"" + it->second + "\"");
    }
    return v;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    const char* text = it->second.c_str();
    char* end = nullptr;
    const long v = std::strtol(text, &end, 10);
    if (end == text || *end != '\0') {
        throw ParseError("config key \"" + key + "\": not an integer: \"" + it->second + "\"");
    }
    return static_cast<int>(v);
}

double RunConfig::require_double(const std::string& key) const {
    if (!has(key)) {
        throw ParseError("config key \"" + key + "\" is required");
    }
    return get_double(key, 0.0);
}

void RunConfig::reject_unknown(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            std::ostringstream msg;
            msg << "unknown config key \"" << key << "\"; known keys:";
            for (const auto& k : allowed) msg << " " << k;
            throw ValidationError(msg.str());
        }
    }
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 14695981039346656037ULL;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file for checksum: " + path);
    }
    std::uint64_t hash = 14695981039346656037ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        if (n < static_cast<std::streamsize>(sizeof(buf))) break;
    }
    return hash;
}

CsvWriter::CsvWriter(std::string path, std::vector<std::string> columns)
    : path_(std::move(path)), columns_(columns.size()) {
    if (columns.empty()) {
        throw ValidationError("CsvWriter: need at least one column");
    }
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += columns[i];
    }
    buffer_ += '\n';
}

void CsvWriter::row(const std::vector<double>& vals) {
    if (!open_) {
        throw ValidationError("CsvWriter: writer already closed");
    }
    if (vals.size() != columns_) {
        std::ostringstream msg;
        msg << "CsvWriter: row has " << vals.size() << " values, expected " << columns_;
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i > 0) buffer_ += ',';
        buffer_ += format_double(vals[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (!open_) return;
    std::ofstream out(path_, std::ios::binary);
    if (!out) {
        throw ValidationError("CsvWriter: cannot open " + path_);
    }
    out << buffer_;
    open_ = false;
}

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {
    if (!(width > 0.0) || !(height > 0.0)) {
        throw ValidationError("SvgCanvas: dimensions must be positive");
    }
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill) {
    std::ostringstream s;
    s << "  <rect x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" width=\""
      << format_double(w) << "\" height=\"" << format_double(h) << "\" fill=\"" << fill
      << "\"/>\n";
    body_ += s.str();
}

void SvgCanvas::polygon(const std::vector<std::array<double, 2>>& pts, const std::string& fill,
                        const std::string& stroke, double stroke_width) {
    std::ostringstream s;
    s << "  <polygon points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) s << ' ';
        s << format_double(pts[i][0]) << ',' << format_double(pts[i][1]);
    }
    s << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\""
      << format_double(stroke_width) << "\"/>\n";
    body_ += s.str();
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width) {
    std::ostringstream s;
    s << "  <line x1=\"" << format_double(x1) << "\" y1=\"" << format_double(y1) << "\" x2=\""
      << format_double(x2) << "\" y2=\"" << format_double(y2) << "\" stroke=\"" << stroke
      << "\" stroke-width=\"" << format_double(stroke_width) << "\"/>\n";
    body_ += s.str();
}

void SvgCanvas::text(double x, double y, const std::string& content, double size) {
    std::ostringstream s;
    s << "  <text x=\"" << format_double(x) << "\" y=\"" << format_double(y)
      << "\" font-size=\"" << format_double(size) << "\" font-family=\"monospace\">" << content
      << "</text>\n";
    body_ += s.str();
}

void SvgCanvas::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("SvgCanvas: cannot open " + path);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << format_double(width_)
        << ' ' << format_double(height_) << "\">\n"
        << body_ << "</svg>\n";
}

RunContext::RunContext(std::string out_dir, std::string command, std::uint64_t seed, int threads)
    : out_dir_(std::move(out_dir)), command_(std::move(command)), seed_(seed),
      threads_(threads) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    if (ec) {
        throw ValidationError("cannot create output directory " + out_dir_ + ": " +
                              ec.message());
    }
}

std::string RunContext::path(const std::string& name) {
    if (name.empty() || name.find('/') != std::string::npos) {
        throw ValidationError("artifact name must be a plain file name: " + name);
    }
    artifacts_.push_back(name);
    return (std::filesystem::path(out_dir_) / name).string();
}

void RunContext::finish() {
    std::sort(artifacts_.begin(), artifacts_.end());
    artifacts_.erase(std::unique(artifacts_.begin(), artifacts_.end()), artifacts_.end());

    std::ostringstream manifest;
    for (const auto& name : artifacts_) {
        const std::string full = (std::filesystem::path(out_dir_) / name).string();
        const std::uint64_t hash = fnv1a64_file(full);
        const auto size = std::filesystem::file_size(full);
        char hex[17];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
        manifest << hex << "  " << size << "  " << name << "\n";
    }
    {
        std::ofstream out(std::filesystem::path(out_dir_) / "manifest.txt", std::ios::binary);
        if (!out) {
            throw ValidationError("cannot write manifest.txt in " + out_dir_);
        }
        out << manifest.str();
    }
    {
        std::ofstream out(std::filesystem::path(out_dir_) / "runinfo.txt", std::ios::binary);
        if (!out) {
            throw ValidationError("cannot write runinfo.txt in " + out_dir_);
        }
        out << "version " << kVersion << "\n"
            << "command " << command_ << "\n"
            << "seed " << seed_ << "\n"
            << "threads " << threads_ << "\n"
            << "artifacts " << artifacts_.size() << "\n";
    }
}

}  // namespace nembrane
