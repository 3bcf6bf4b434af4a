#include "json.hpp"

#include <string>

#include "tonelut/error.hpp"
#include "tonelut/formats.hpp"

namespace tonelut {

namespace {

using nlohmann::json;

[[noreturn]] void store_error(std::size_t line, const std::string& what) {
    fail(ErrorCode::format, "embedding store line " + std::to_string(line) + ": " + what);
}

}  // namespace

EmbeddingProvider parse_embedding_store(std::string_view text) {
    std::vector<EmbeddingProvider::StoreEntry> entries;
    std::string model;
    long long header_dim = -1;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            store_error(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!record.is_object()) store_error(line_no, "record must be a JSON object");

        if (!record.contains("key")) {
            if (!entries.empty() || header_dim >= 0) store_error(line_no, "header record must come first");
            if (!record.contains("dim") || !record["dim"].is_number_integer()) {
                store_error(line_no, "header needs an integer 'dim'");
            }
            header_dim = record["dim"].get<long long>();
            if (header_dim <= 0) store_error(line_no, "header 'dim' must be positive");
            if (record.contains("model")) {
                if (!record["model"].is_string()) store_error(line_no, "'model' must be a string");
                model = record["model"].get<std::string>();
            }
            continue;
        }
        if (!record["key"].is_string()) store_error(line_no, "'key' must be a string");
        if (!record.contains("dim") || !record["dim"].is_number_integer()) store_error(line_no, "missing integer 'dim'");
        if (!record.contains("values") || !record["values"].is_array()) store_error(line_no, "missing 'values' array");
        const long long dim = record["dim"].get<long long>();
        const json& values = record["values"];
        if (dim <= 0 || static_cast<std::size_t>(dim) != values.size()) {
            store_error(line_no, "'dim' " + std::to_string(dim) + " does not match " + std::to_string(values.size()) +
                                     " values");
        }
        if (header_dim >= 0 && dim != header_dim) {
            store_error(line_no, "dimension " + std::to_string(dim) + " differs from header dimension " +
                                     std::to_string(header_dim));
        }
        if (!entries.empty() && static_cast<std::size_t>(dim) != entries.front().values.size()) {
            store_error(line_no, "dimension " + std::to_string(dim) + " differs from earlier records (" +
                                     std::to_string(entries.front().values.size()) + ")");
        }
        EmbeddingProvider::StoreEntry entry;
        entry.key = record["key"].get<std::string>();
        entry.values.reserve(values.size());
        for (const auto& v : values) {
            if (!v.is_number()) store_error(line_no, "non-numeric embedding component");
            entry.values.push_back(v.get<double>());
        }
        for (const auto& existing : entries) {
            if (existing.key == entry.key) store_error(line_no, "duplicate key '" + entry.key + "'");
        }
        entries.push_back(std::move(entry));
    }
    try {
        return EmbeddingProvider::file_store(std::move(entries), std::move(model));
    } catch (const Error& e) {
        fail(ErrorCode::format, e.what());
    }
}

EmbeddingProvider read_embedding_store(const std::filesystem::path& path) {
    return parse_embedding_store(read_file(path));
}

std::string format_embedding_store(const EmbeddingProvider& provider) {
    if (provider.mode() != EmbeddingMode::file_store) {
        fail(ErrorCode::config, "only file-store providers can be written as an embedding store");
    }
    std::string out;
    json header = {{"dim", provider.dim()}};
    if (!provider.model_name().empty()) header["model"] = provider.model_name();
    if (provider.dim() > 0) out += header.dump() + "\n";
    for (const auto& entry : provider.store_entries()) {
        json record = {{"key", entry.key}, {"dim", entry.values.size()}, {"values", entry.values}};
        out += record.dump() + "\n";
    }
    return out;
}

void write_embedding_store(const EmbeddingProvider& provider, const std::filesystem::path& path) {
    write_file_atomic(path, format_embedding_store(provider));
}

}  // namespace tonelut
