#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "datefield/errors.hpp"

namespace datefield {

// Writes bytes to <path>.tmp in the target directory, then renames over the
// destination so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out)
            throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw IoError("rename failed: " + path.string() + ": " + ec.message());
}

} // namespace datefield
