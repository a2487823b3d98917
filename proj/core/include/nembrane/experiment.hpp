#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nembrane {

inline constexpr const char* kVersion = "0.1.0";

// Flat key=value configuration with dotted keys ("material.lambda = 1.0").
// '#' starts a comment anywhere on a line; keys may not repeat.
struct RunConfig {
    std::map<std::string, std::string> values;

    static RunConfig parse_string(const std::string& text, const std::string& origin = "config");
    static RunConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    double require_double(const std::string& key) const;

    // Throws ValidationError when a key outside the allowed set is present.
    void reject_unknown(const std::vector<std::string>& allowed) const;
};

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);

// Column-oriented CSV with fixed "%.12g" number formatting so reruns are
// byte-identical.
class CsvWriter {
  public:
    CsvWriter(std::string path, std::vector<std::string> columns);
    void row(const std::vector<double>& vals);
    void close();

  private:
    std::string path_;
    std::size_t columns_ = 0;
    std::string buffer_;
    bool open_ = true;
};

// Small SVG canvas; shapes accumulate and write() emits the document.
class SvgCanvas {
  public:
    SvgCanvas(double width, double height);
    void rect(double x, double y, double w, double h, const std::string& fill);
    void polygon(const std::vector<std::array<double, 2>>& pts, const std::string& fill,
                 const std::string& stroke, double stroke_width);
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width);
    void text(double x, double y, const std::string& content, double size);
    void write(const std::string& path) const;

  private:
    double width_ = 0.0;
    double height_ = 0.0;
    std::string body_;
};

// Output-directory bookkeeping: registers every artifact a run produces and
// finishes by writing runinfo.txt plus manifest.txt with FNV-1a checksums.
// Contents carry no timestamps so a rerun with the same inputs is
// byte-identical.
class RunContext {
  public:
    RunContext(std::string out_dir, std::string command, std::uint64_t seed, int threads);

    // Absolute path for a named artifact; the name is recorded for the
    // manifest.
    std::string path(const std::string& name);

    const std::string& dir() const { return out_dir_; }

    void finish();

  private:
    std::string out_dir_;
    std::string command_;
    std::uint64_t seed_ = 0;
    int threads_ = 1;
    std::vector<std::string> artifacts_;
};

}  // namespace nembrane
