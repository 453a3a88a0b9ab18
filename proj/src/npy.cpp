#include "coreshape/npy.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "coreshape/errors.hpp"

namespace coreshape {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

// Pulls the value of a python-dict-literal key out of the header string.
// Good enough for headers produced by numpy or by write_npy below.
std::string dict_value(const std::string& header, const std::string& key) {
    const std::string quoted = "'" + key + "'";
    std::size_t pos = header.find(quoted);
    if (pos == std::string::npos)
        throw format_error("npy: header is missing key " + quoted);
    pos = header.find(':', pos + quoted.size());
    if (pos == std::string::npos)
        throw format_error("npy: malformed header near " + quoted);
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    std::size_t end;
    if (pos < header.size() && header[pos] == '\'') {
        end = header.find('\'', pos + 1);
        if (end == std::string::npos) throw format_error("npy: unterminated string in header");
        return header.substr(pos + 1, end - pos - 1);
    }
    if (pos < header.size() && header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string::npos) throw format_error("npy: unterminated tuple in header");
        return header.substr(pos, end - pos + 1);
    }
    end = header.find_first_of(",}", pos);
    if (end == std::string::npos) throw format_error("npy: malformed header");
    std::string v = header.substr(pos, end - pos);
    while (!v.empty() && v.back() == ' ') v.pop_back();
    return v;
}

std::vector<std::int64_t> parse_shape_tuple(const std::string& tup) {
    if (tup.size() < 2 || tup.front() != '(' || tup.back() != ')')
        throw format_error("npy: shape is not a tuple");
    std::vector<std::int64_t> shape;
    std::string body = tup.substr(1, tup.size() - 2);
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t a = tok.find_first_not_of(' ');
        if (a == std::string::npos) continue; // trailing comma of a 1-tuple
        std::size_t b = tok.find_last_not_of(' ');
        tok = tok.substr(a, b - a + 1);
        try {
            std::size_t used = 0;
            std::int64_t d = std::stoll(tok, &used);
            if (used != tok.size()) throw format_error("npy: bad shape entry '" + tok + "'");
            shape.push_back(d);
        } catch (const std::invalid_argument&) {
            throw format_error("npy: bad shape entry '" + tok + "'");
        } catch (const std::out_of_range&) {
            throw format_error("npy: shape entry out of range");
        }
    }
    return shape;
}

} // namespace

DenseTensor read_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("npy: cannot open '" + path + "'");

    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0)
        throw format_error("npy: bad magic string");
    unsigned char ver[2];
    if (!in.read(reinterpret_cast<char*>(ver), 2))
        throw format_error("npy: truncated version field");
    if (ver[0] != 1 || ver[1] != 0)
        throw format_error("npy: only format version 1.0 is supported");

    unsigned char len_bytes[2];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 2))
        throw format_error("npy: truncated header length");
    const std::size_t header_len =
        static_cast<std::size_t>(len_bytes[0]) | (static_cast<std::size_t>(len_bytes[1]) << 8);

    std::string header(header_len, '\0');
    if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
        throw format_error("npy: truncated header");

    if (dict_value(header, "descr") != "<f8")
        throw format_error("npy: dtype must be '<f8'");
    const std::string fortran = dict_value(header, "fortran_order");
    if (fortran == "True")
        throw format_error("npy: fortran_order arrays are not supported");
    if (fortran != "False")
        throw format_error("npy: malformed fortran_order flag");

    std::vector<std::int64_t> shape = parse_shape_tuple(dict_value(header, "shape"));
    if (shape.empty())
        throw format_error("npy: 0-dimensional arrays are not supported");
    std::int64_t count = 1;
    for (std::int64_t d : shape) {
        if (d < 1) throw format_error("npy: dims must be >= 1");
        count *= d;
    }

    std::vector<double> data(static_cast<std::size_t>(count));
    if (!in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(data.size() * sizeof(double))))
        throw format_error("npy: truncated data payload");

    try {
        return DenseTensor(std::move(shape), std::move(data));
    } catch (const std::invalid_argument& e) {
        throw format_error(std::string("npy: ") + e.what());
    }
}

void write_npy(const DenseTensor& x, const std::string& path) {
    std::ostringstream dict;
    dict << "{'descr': '<f8', 'fortran_order': False, 'shape': (";
    for (int n = 0; n < x.order(); ++n) {
        if (n) dict << ", ";
        dict << x.shape()[static_cast<std::size_t>(n)];
    }
    if (x.order() == 1) dict << ",";
    dict << "), }";

    std::string header = dict.str();
    // pad with spaces so that magic+version+len+header is a multiple of 64,
    // with a closing newline (numpy's own layout)
    const std::size_t base = 6 + 2 + 2;
    std::size_t total = base + header.size() + 1;
    header.append((64 - total % 64) % 64, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("npy: cannot open '" + path + "' for writing");
    out.write(kMagic, 6);
    const unsigned char ver[2] = {1, 0};
    out.write(reinterpret_cast<const char*>(ver), 2);
    const std::size_t hl = header.size();
    const unsigned char len_bytes[2] = {static_cast<unsigned char>(hl & 0xff),
                                        static_cast<unsigned char>((hl >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(len_bytes), 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(x.data().data()),
              static_cast<std::streamsize>(x.data().size() * sizeof(double)));
    if (!out) throw format_error("npy: write failed for '" + path + "'");
}

} // namespace coreshape
