#include "nslab/io.hpp"

#include <charconv>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace nslab {

const char* kVersionString = "nslab 0.1.0";

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const std::string& c = cells[i];
        bool quote = c.find_first_of(",\"\r\n") != std::string::npos;
        if (quote) {
            out_ << '"';
            for (char ch : c) {
                if (ch == '"') out_ << '"';
                out_ << ch;
            }
            out_ << '"';
        } else {
            out_ << c;
        }
        if (i + 1 < cells.size()) out_ << ',';
    }
    out_ << "\r\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {
struct BinHeader {
    char magic[8] = {'n', 's', 'f', 'i', 'e', 'l', 'd', '1'};
    std::int32_t dim = 0;
    std::int32_t ncomp = 0;
    std::int32_t n[3] = {0, 0, 0};
    double h[3] = {0, 0, 0};
    double origin[3] = {0, 0, 0};
};
}  // namespace

void save_field_binary(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    BinHeader hd;
    hd.dim = f.grid().dim();
    hd.ncomp = f.ncomp();
    for (int a = 0; a < 3; ++a) {
        hd.n[a] = a < hd.dim ? f.grid().intervals(a) : 0;
        hd.h[a] = a < hd.dim ? f.grid().h(a) : 0;
        hd.origin[a] = a < hd.dim ? f.grid().origin(a) : 0;
    }
    out.write(reinterpret_cast<const char*>(&hd), sizeof(hd));
    out.write(reinterpret_cast<const char*>(f.data().data()),
              static_cast<std::streamsize>(f.data().size() * sizeof(double)));
}

Field load_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    BinHeader hd;
    in.read(reinterpret_cast<char*>(&hd), sizeof(hd));
    if (std::memcmp(hd.magic, "nsfield1", 8) != 0)
        throw std::runtime_error("bad field file " + path);
    Vec3 len = {hd.n[0] * hd.h[0], hd.n[1] * hd.h[1], hd.n[2] * hd.h[2]};
    Grid g(hd.dim, {hd.n[0], hd.n[1], hd.n[2]}, {hd.origin[0], hd.origin[1], hd.origin[2]}, len);
    Field f(g, hd.ncomp);
    in.read(reinterpret_cast<char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated field file " + path);
    return f;
}

void save_field_csv(const Field& f, const std::string& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"node"};
    for (int a = 0; a < f.grid().dim(); ++a) header.push_back("x" + std::to_string(a));
    for (int c = 0; c < f.ncomp(); ++c) header.push_back("c" + std::to_string(c));
    csv.row(header);
    for (std::size_t idx = 0; idx < f.num_nodes(); ++idx) {
        std::vector<std::string> row = {std::to_string(idx)};
        Vec3 x = f.grid().coord(idx);
        for (int a = 0; a < f.grid().dim(); ++a) row.push_back(format_double(x[a]));
        for (int c = 0; c < f.ncomp(); ++c) row.push_back(format_double(f.at(c, idx)));
        csv.row(row);
    }
}

}  // namespace nslab
