#include "partreg/io.hpp"

#include "atomic_io.hpp"
#include "partreg/errors.hpp"
#include "partreg/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "binary PLY IO assumes a little-endian host");

namespace partreg {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

int scalar_size(const std::string& type) {
    static const std::map<std::string, int> sizes = {
        {"char", 1},  {"int8", 1},    {"uchar", 1},  {"uint8", 1},  {"short", 2},
        {"int16", 2}, {"ushort", 2},  {"uint16", 2}, {"int", 4},    {"int32", 4},
        {"uint", 4},  {"uint32", 4},  {"float", 4},  {"float32", 4}, {"double", 8},
        {"float64", 8}};
    auto it = sizes.find(type);
    return it == sizes.end() ? -1 : it->second;
}

bool is_float_type(const std::string& type) {
    return type == "float" || type == "float32" || type == "double" || type == "float64";
}

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    long count = 0;
    std::vector<PlyProperty> props;
};

struct PlyHeader {
    bool binary = false;
    std::vector<PlyElement> elements;
    int header_lines = 0;
};

[[noreturn]] void parse_fail(const std::filesystem::path& path, int line, const std::string& msg) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void byte_fail(const std::filesystem::path& path, std::size_t offset,
                            const std::string& msg) {
    throw ParseError(path.string() + ": byte " + std::to_string(offset) + ": " + msg);
}

PlyHeader parse_ply_header(std::istream& in, const std::filesystem::path& path) {
    PlyHeader header;
    std::string line;
    int line_no = 0;

    auto next_line = [&]() -> std::string& {
        if (!std::getline(in, line)) parse_fail(path, line_no + 1, "unexpected end of header");
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line() != "ply") parse_fail(path, line_no, "missing 'ply' magic");

    bool saw_format = false;
    while (true) {
        std::istringstream ls(next_line());
        std::string keyword;
        ls >> keyword;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii")
                header.binary = false;
            else if (fmt == "binary_little_endian")
                header.binary = true;
            else if (fmt == "binary_big_endian")
                throw UnsupportedFormat(path.string() + ": big-endian PLY is not supported");
            else
                parse_fail(path, line_no, "unknown format '" + fmt + "'");
            saw_format = true;
        } else if (keyword == "element") {
            PlyElement element;
            ls >> element.name >> element.count;
            if (ls.fail() || element.count < 0) parse_fail(path, line_no, "bad element line");
            header.elements.push_back(element);
        } else if (keyword == "property") {
            if (header.elements.empty()) parse_fail(path, line_no, "property before any element");
            PlyProperty prop;
            std::string first;
            ls >> first;
            if (first == "list") {
                prop.is_list = true;
                ls >> prop.count_type >> prop.type >> prop.name;
            } else {
                prop.type = first;
                ls >> prop.name;
            }
            if (ls.fail() || prop.name.empty()) parse_fail(path, line_no, "bad property line");
            if (scalar_size(prop.type) < 0 || (prop.is_list && scalar_size(prop.count_type) < 0))
                throw UnsupportedFormat(path.string() + ": unsupported property type '" +
                                        prop.type + "'");
            header.elements.back().props.push_back(prop);
        } else if (keyword == "end_header") {
            break;
        } else {
            parse_fail(path, line_no, "unknown header keyword '" + keyword + "'");
        }
    }
    if (!saw_format) parse_fail(path, line_no, "missing format line");
    header.header_lines = line_no;
    return header;
}

// Whitespace tokenizer over the ascii payload, tracking line numbers.
class TokenReader {
public:
    TokenReader(std::istream& in, int start_line) : in_(in), line_(start_line) {}

    std::string next(const std::filesystem::path& path) {
        std::string token;
        int c;
        while ((c = in_.get()) != EOF) {
            if (c == '\n') {
                ++line_;
                if (!token.empty()) {
                    --line_;  // token ended at the newline; report its own line
                    in_.unget();
                    return token;
                }
            } else if (std::isspace(c)) {
                if (!token.empty()) return token;
            } else {
                token.push_back(static_cast<char>(c));
            }
        }
        if (token.empty()) parse_fail(path, line_, "unexpected end of file");
        return token;
    }

    double next_double(const std::filesystem::path& path) {
        const std::string token = next(path);
        try {
            std::size_t pos = 0;
            const double v = std::stod(token, &pos);
            if (pos != token.size()) throw std::invalid_argument(token);
            return v;
        } catch (const std::exception&) {
            parse_fail(path, line_, "expected a number, got '" + token + "'");
        }
    }

    long next_long(const std::filesystem::path& path) {
        return static_cast<long>(next_double(path));
    }

    int line() const { return line_; }

private:
    std::istream& in_;
    int line_;
};

double read_scalar_le(const char* data, const std::string& type) {
    if (type == "float" || type == "float32") {
        float v;
        std::memcpy(&v, data, 4);
        return v;
    }
    double v;
    std::memcpy(&v, data, 8);
    return v;
}

PointCloud finalize_normals(PointCloud cloud, const std::filesystem::path& path) {
    for (std::size_t i = 0; i < cloud.normals.size(); ++i) {
        const double len = cloud.normals[i].norm();
        if (len < 1e-12)
            throw ParseError(path.string() + ": vertex " + std::to_string(i) +
                             " has a zero-norm normal");
        // keep already-unit normals bit-identical so binary round trips hold
        if (std::abs(len - 1.0) > 1e-9) cloud.normals[i] /= len;
    }
    return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const PlyHeader header = parse_ply_header(in, path);

    const auto vertex_it =
        std::find_if(header.elements.begin(), header.elements.end(),
                     [](const PlyElement& e) { return e.name == "vertex"; });
    if (vertex_it == header.elements.end())
        parse_fail(path, header.header_lines, "no vertex element");
    const PlyElement& vertex = *vertex_it;
    if (vertex.count == 0) parse_fail(path, header.header_lines, "vertex element is empty");

    std::map<std::string, int> field;  // property name -> index within vertex props
    for (std::size_t i = 0; i < vertex.props.size(); ++i)
        field.emplace(vertex.props[i].name, static_cast<int>(i));
    for (const char* required : {"x", "y", "z"})
        if (!field.count(required))
            parse_fail(path, header.header_lines,
                       std::string("vertex element missing property '") + required + "'");
    const bool with_normals = field.count("nx") && field.count("ny") && field.count("nz");
    for (const char* name : {"x", "y", "z", "nx", "ny", "nz"}) {
        auto it = field.find(name);
        if (it == field.end()) continue;
        const PlyProperty& p = vertex.props[it->second];
        if (p.is_list || !is_float_type(p.type))
            throw UnsupportedFormat(path.string() + ": property '" + std::string(name) +
                                    "' must be a 32- or 64-bit float");
    }

    PointCloud cloud;
    cloud.points.reserve(vertex.count);
    if (with_normals) cloud.normals.reserve(vertex.count);

    if (!header.binary) {
        TokenReader tokens(in, header.header_lines);
        int face_like = 0;
        for (const PlyElement& element : header.elements) {
            if (element.name == "vertex") {
                std::vector<double> row(element.props.size());
                for (long r = 0; r < element.count; ++r) {
                    for (std::size_t p = 0; p < element.props.size(); ++p) {
                        if (element.props[p].is_list) {
                            const long count = tokens.next_long(path);
                            for (long c = 0; c < count; ++c) tokens.next(path);
                            row[p] = 0.0;
                        } else {
                            row[p] = tokens.next_double(path);
                        }
                    }
                    cloud.points.emplace_back(row[field["x"]], row[field["y"]], row[field["z"]]);
                    if (with_normals)
                        cloud.normals.emplace_back(row[field["nx"]], row[field["ny"]],
                                                   row[field["nz"]]);
                }
            } else {
                if (element.name == "face") ++face_like;
                for (long r = 0; r < element.count; ++r) {
                    for (const PlyProperty& p : element.props) {
                        if (p.is_list) {
                            const long count = tokens.next_long(path);
                            for (long c = 0; c < count; ++c) tokens.next(path);
                        } else {
                            tokens.next(path);
                        }
                    }
                }
            }
        }
        if (face_like > 0) warn(path.string() + ": face elements ignored");
        return finalize_normals(std::move(cloud), path);
    }

    // Binary little-endian payload.
    const std::size_t payload_start = static_cast<std::size_t>(in.tellg());
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t offset = 0;

    for (const PlyElement& element : header.elements) {
        if (element.name != "vertex") {
            long stride = 0;
            for (const PlyProperty& p : element.props) {
                if (p.is_list)
                    throw UnsupportedFormat(path.string() +
                                            ": binary list properties before the vertex data "
                                            "are not supported");
                stride += scalar_size(p.type);
            }
            offset += static_cast<std::size_t>(stride) * element.count;
            if (offset > payload.size())
                byte_fail(path, payload_start + payload.size(), "truncated element data");
            continue;
        }

        long stride = 0;
        std::vector<long> prop_offset(element.props.size(), 0);
        for (std::size_t p = 0; p < element.props.size(); ++p) {
            if (element.props[p].is_list)
                throw UnsupportedFormat(path.string() +
                                        ": binary list properties in the vertex element are "
                                        "not supported");
            prop_offset[p] = stride;
            stride += scalar_size(element.props[p].type);
        }
        if (offset + static_cast<std::size_t>(stride) * element.count > payload.size())
            byte_fail(path, payload_start + payload.size(), "truncated vertex data");

        auto get = [&](long row, const char* name) {
            const int p = field[name];
            const char* base = payload.data() + offset + row * stride + prop_offset[p];
            return read_scalar_le(base, vertex.props[p].type);
        };
        for (long r = 0; r < element.count; ++r) {
            cloud.points.emplace_back(get(r, "x"), get(r, "y"), get(r, "z"));
            if (with_normals)
                cloud.normals.emplace_back(get(r, "nx"), get(r, "ny"), get(r, "nz"));
        }
        break;  // elements after vertex carry nothing we read
    }
    if (cloud.points.empty()) byte_fail(path, payload_start, "no vertex data read");
    return finalize_normals(std::move(cloud), path);
}

PointCloud read_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    PointCloud cloud;
    std::string line;
    int line_no = 0;
    long faces = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "v") {
            double x, y, z;
            ls >> x >> y >> z;
            if (ls.fail()) parse_fail(path, line_no, "bad vertex line");
            cloud.points.emplace_back(x, y, z);
        } else if (keyword == "f") {
            ++faces;
        }
        // vn/vt/usemtl/... carry no per-vertex data we can associate reliably
    }
    if (faces > 0)
        warn(path.string() + ": " + std::to_string(faces) + " face lines ignored");
    if (cloud.points.empty()) parse_fail(path, line_no, "no vertices found");
    return cloud;
}

}  // namespace

PointCloud read_point_cloud(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("file not found: " + path.string());
    const std::string ext = lower_ext(path);
    if (ext == ".ply") return read_ply(path);
    if (ext == ".obj") return read_obj(path);
    throw UnsupportedFormat("unsupported point cloud format: " + path.string());
}

void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                       PlyFormat format) {
    cloud.validate("write_point_cloud");
    const bool binary = format == PlyFormat::BinaryLittleEndian;

    std::string out;
    out += "ply\n";
    out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
    out += std::string("comment ") + kVersionString + "\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    if (cloud.has_normals())
        out += "property double nx\nproperty double ny\nproperty double nz\n";
    out += "end_header\n";

    if (binary) {
        auto append = [&out](double v) {
            char buf[8];
            std::memcpy(buf, &v, 8);
            out.append(buf, 8);
        };
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            for (int c = 0; c < 3; ++c) append(cloud.points[i][c]);
            if (cloud.has_normals())
                for (int c = 0; c < 3; ++c) append(cloud.normals[i][c]);
        }
    } else {
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            out += fmt_double(cloud.points[i].x()) + " " + fmt_double(cloud.points[i].y()) +
                   " " + fmt_double(cloud.points[i].z());
            if (cloud.has_normals())
                out += " " + fmt_double(cloud.normals[i].x()) + " " +
                       fmt_double(cloud.normals[i].y()) + " " + fmt_double(cloud.normals[i].z());
            out += "\n";
        }
    }
    detail::atomic_write(path, out);
}

namespace {

std::string pose_json(const RigidTransform& pose, const std::string& indent) {
    std::string out;
    out += indent + "\"rotation\": [";
    for (int r = 0; r < 3; ++r) {
        out += "[";
        for (int c = 0; c < 3; ++c) {
            out += fmt_double(pose.rotation(r, c));
            if (c < 2) out += ", ";
        }
        out += r < 2 ? "], " : "]";
    }
    out += "],\n";
    out += indent + "\"translation\": [" + fmt_double(pose.translation.x()) + ", " +
           fmt_double(pose.translation.y()) + ", " + fmt_double(pose.translation.z()) + "]";
    return out;
}

}  // namespace

void write_pose(const RegistrationResult& result, const std::string& config_json,
                const std::filesystem::path& path, const std::string& extra_fields) {
    std::string out = "{\n";
    out += std::string("  \"version\": \"") + kVersionString + "\",\n";
    out += "  \"config\": " + (config_json.empty() ? "null" : config_json) + ",\n";
    out += pose_json(result.pose, "  ") + ",\n";
    out += "  \"final_loss\": " + fmt_double(result.final_loss) + ",\n";
    out += "  \"chamfer_to_template\": " + fmt_double(result.chamfer_to_template) + ",\n";
    out += "  \"candidate_index\": " + std::to_string(result.candidate_index) + ",\n";
    out += "  \"candidates\": [\n";
    for (std::size_t i = 0; i < result.all_candidates.size(); ++i) {
        const CandidateResult& c = result.all_candidates[i];
        out += "    {\n";
        out += pose_json(c.pose, "      ") + ",\n";
        out += "      \"final_loss\": " + fmt_double(c.final_loss) + ",\n";
        out += "      \"chamfer\": " + fmt_double(c.chamfer) + ",\n";
        out += std::string("      \"degenerate_init\": ") +
               (c.degenerate_init ? "true" : "false") + "\n";
        out += i + 1 < result.all_candidates.size() ? "    },\n" : "    }\n";
    }
    out += "  ]";
    if (!extra_fields.empty()) out += ",\n  " + extra_fields;
    out += "\n}\n";
    detail::atomic_write(path, out);
}

RigidTransform read_pose(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.contains("rotation") || !doc.contains("translation"))
        throw ParseError(path.string() + ": pose document needs rotation and translation");

    RigidTransform pose;
    try {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) pose.rotation(r, c) = doc["rotation"][r][c].get<double>();
        for (int c = 0; c < 3; ++c) pose.translation[c] = doc["translation"][c].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if ((pose.rotation.transpose() * pose.rotation - Eigen::Matrix3d::Identity()).norm() > 1e-6)
        throw ParseError(path.string() + ": rotation is not orthonormal");
    return pose;
}

}  // namespace partreg
