#include "atomic_io.hpp"

#include "partreg/errors.hpp"

#include <fstream>
#include <random>

namespace partreg::detail {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);

    std::random_device rd;
    const fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("atomic_write: cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("atomic_write: short write to " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("atomic_write: rename to " + path.string() + " failed: " + ec.message());
    }
}

}  // namespace partreg::detail
