#include "emh/cli/io.hpp"

#include "emh/error.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace emh::cli {

const char* const csv_header =
    "seed_index,u1,v1,u2,v2,x,y,z,lambda,residual,delta,smooth,conic_class,conic_center_dist,contact_det";

namespace {

constexpr std::size_t columns = 15;

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(line);
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void bad(std::size_t line, const std::string& what)
{
    throw Error(ErrorKind::io, "csv line " + std::to_string(line) + ": " + what);
}

std::optional<double> parse_cell(const std::string& s, std::size_t line, const char* column)
{
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(line, std::string("bad number '") + s + "' in " + column);
    return v;
}

double required(const std::string& s, std::size_t line, const char* column)
{
    const auto v = parse_cell(s, line, column);
    if (!v) bad(line, std::string("missing ") + column);
    return *v;
}

} // namespace

std::string format_number(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::vector<CsvRow> csv_rows(const SolutionSet& set)
{
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < set.solutions.size(); ++i) {
        const auto& s = set.solutions[i];
        CsvRow r;
        r.seed_index = set.solution_seed[i];
        r.p1 = s.p1();
        r.p2 = s.p2();
        r.x = s.x;
        r.lambda = s.pair.lambda;
        r.residual = s.residuals.max();
        r.delta = s.delta;
        r.smooth = s.smooth;
        if (s.conic) {
            r.conic_class = s.conic->conic_class;
            r.conic_center_dist = s.conic->center_distance;
            r.contact_det = s.conic->contact_det;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string to_csv(const std::vector<CsvRow>& rows)
{
    std::string out = std::string(csv_header) + "\n";
    auto coord = [](const std::vector<double>& v, std::size_t k) {
        return k < v.size() ? format_number(v[k]) : std::string();
    };
    for (const auto& r : rows) {
        std::vector<double> x(r.x.data(), r.x.data() + r.x.size());
        out += std::to_string(r.seed_index);
        for (const auto& f : {coord(r.p1, 0), coord(r.p1, 1), coord(r.p2, 0), coord(r.p2, 1), coord(x, 0), coord(x, 1),
                              coord(x, 2), format_number(r.lambda), format_number(r.residual), cell(r.delta),
                              r.smooth ? std::string(*r.smooth ? "true" : "false") : std::string(),
                              r.conic_class ? std::string(to_string(*r.conic_class)) : std::string(),
                              cell(r.conic_center_dist), cell(r.contact_det)})
            out += "," + f;
        out += "\n";
    }
    return out;
}

std::vector<CsvRow> parse_csv(const std::string& text)
{
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) bad(1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != csv_header) bad(1, "unexpected header");
    std::vector<CsvRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != columns) bad(n, "expected 15 fields, got " + std::to_string(f.size()));
        CsvRow r;
        const auto idx = required(f[0], n, "seed_index");
        if (idx < 0 || idx != std::floor(idx)) bad(n, "seed_index must be a non-negative integer");
        r.seed_index = static_cast<std::size_t>(idx);
        r.p1.push_back(required(f[1], n, "u1"));
        if (auto v = parse_cell(f[2], n, "v1")) r.p1.push_back(*v);
        r.p2.push_back(required(f[3], n, "u2"));
        if (auto v = parse_cell(f[4], n, "v2")) r.p2.push_back(*v);
        if (r.p1.size() != r.p2.size()) bad(n, "v1 and v2 must both be present or both empty");
        std::vector<double> x{required(f[5], n, "x"), required(f[6], n, "y")};
        if (auto z = parse_cell(f[7], n, "z")) x.push_back(*z);
        if (x.size() != r.p1.size() + 1) bad(n, "coordinate count does not match the parameter count");
        r.x = Vec::Map(x.data(), static_cast<Eigen::Index>(x.size()));
        r.lambda = required(f[8], n, "lambda");
        r.residual = required(f[9], n, "residual");
        r.delta = parse_cell(f[10], n, "delta");
        if (f[11] == "true") r.smooth = true;
        else if (f[11] == "false") r.smooth = false;
        else if (!f[11].empty()) bad(n, "smooth must be true, false or empty");
        if (!f[12].empty()) {
            try {
                r.conic_class = conic_class_from_string(f[12]);
            } catch (const Error&) {
                bad(n, "unknown conic_class '" + f[12] + "'");
            }
        }
        r.conic_center_dist = parse_cell(f[13], n, "conic_center_dist");
        r.contact_det = parse_cell(f[14], n, "contact_det");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CsvRow> read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string to_obj(const SolutionSet& set)
{
    std::string out = "# envelope points\n";
    for (const auto& s : set.solutions) {
        out += "v";
        for (Eigen::Index k = 0; k < 3; ++k) out += " " + format_number(k < s.x.size() ? s.x(k) : 0.0);
        out += "\n";
    }
    return out;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::io, "write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorKind::io, "cannot move output into '" + path + "'");
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace emh::cli
