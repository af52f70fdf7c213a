#include "ppcmt/cloud_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ppcmt {

CloudFormat format_for_path(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    if (dot != std::string::npos && path.substr(dot) == ".pcf") return CloudFormat::pcf;
    return CloudFormat::xyz;
}

namespace {

double parse_coord(const std::string& token, const std::string& path, std::size_t line_no) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": non-numeric token '" << token << "'";
        throw ParseError(msg.str());
    }
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": non-finite coordinate '" << token << "'";
        throw ParseError(msg.str());
    }
    return value;
}

PointCloud read_xyz(std::istream& in, const std::string& path) {
    PointCloud cloud;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tx, ty, tz;
        if (!(ls >> tx)) continue;  // blank line
        if (!(ls >> ty >> tz)) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": expected three coordinates";
            throw ParseError(msg.str());
        }
        std::string extra;
        if (ls >> extra) {
            std::ostringstream msg;
            msg << path << ":" << line_no << ": trailing token '" << extra << "'";
            throw ParseError(msg.str());
        }
        cloud.push_back({parse_coord(tx, path, line_no), parse_coord(ty, path, line_no),
                         parse_coord(tz, path, line_no)});
    }
    return cloud;
}

std::uint32_t get_u32(std::istream& in, const std::string& path, std::size_t& offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) {
        std::ostringstream msg;
        msg << path << ": truncated payload at offset " << offset;
        throw ParseError(msg.str());
    }
    offset += 4;
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

PointCloud read_pcf(std::istream& in, const std::string& path) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "PCF1", 4) != 0)
        throw ParseError(path + ": bad magic, expected PCF1");
    std::size_t offset = 4;
    const std::uint32_t count = get_u32(in, path, offset);
    PointCloud cloud;
    cloud.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        float c[3];
        for (float& v : c) {
            const std::uint32_t bits = get_u32(in, path, offset);
            std::memcpy(&v, &bits, 4);
            if (!std::isfinite(v)) {
                std::ostringstream msg;
                msg << path << ": non-finite coordinate at offset " << (offset - 4);
                throw ParseError(msg.str());
            }
        }
        cloud.push_back({static_cast<double>(c[0]), static_cast<double>(c[1]),
                         static_cast<double>(c[2])});
    }
    return cloud;
}

void append_shortest(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.append(buf, ptr);
}

}  // namespace

PointCloud read_cloud(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open cloud file: " + path);
    if (format_for_path(path) == CloudFormat::pcf) return read_pcf(in, path);
    // sniff the magic so binary clouds load regardless of extension
    char magic[4] = {};
    in.read(magic, 4);
    const bool is_pcf = in.gcount() == 4 && std::memcmp(magic, "PCF1", 4) == 0;
    in.clear();
    in.seekg(0);
    return is_pcf ? read_pcf(in, path) : read_xyz(in, path);
}

void write_cloud(const std::string& path, const PointCloud& cloud, CloudFormat format) {
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw ParseError("cannot write cloud file: " + path);
    if (format == CloudFormat::xyz) {
        std::string buf;
        buf.reserve(cloud.size() * 24);
        for (const Vec3& p : cloud) {
            append_shortest(buf, p.x);
            buf.push_back(' ');
            append_shortest(buf, p.y);
            buf.push_back(' ');
            append_shortest(buf, p.z);
            buf.push_back('\n');
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    } else {
        out.write("PCF1", 4);
        const std::uint32_t count = static_cast<std::uint32_t>(cloud.size());
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((count >> (8 * i)) & 0xFF);
        out.write(b, 4);
        for (const Vec3& p : cloud) {
            for (double coord : {p.x, p.y, p.z}) {
                const float f = static_cast<float>(coord);
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
                out.write(b, 4);
            }
        }
    }
    if (!out) throw ParseError("write failed: " + path);
}

void write_cloud(const std::string& path, const PointCloud& cloud) {
    write_cloud(path, cloud, format_for_path(path));
}

}  // namespace ppcmt
