#pragma once

// RAII and exception glue over the C API for the command-line tools.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tonelut/tonelut.h"

namespace tonelut_tools {

class ApiError : public std::runtime_error {
public:
    ApiError(tl_status status, const std::string& message) : std::runtime_error(message), status_(status) {}
    tl_status status() const noexcept { return status_; }
    const char* code() const noexcept { return tl_status_name(status_); }

private:
    tl_status status_;
};

inline void check(tl_status status) {
    if (status != TL_OK) throw ApiError(status, tl_last_error());
}

struct Deleter {
    void operator()(tl_image* p) const noexcept { tl_image_free(p); }
    void operator()(tl_model* p) const noexcept { tl_model_free(p); }
    void operator()(tl_provider* p) const noexcept { tl_provider_free(p); }
    void operator()(tl_lut* p) const noexcept { tl_lut_free(p); }
    void operator()(tl_adjustment* p) const noexcept { tl_adjustment_free(p); }
};

using Image = std::unique_ptr<tl_image, Deleter>;
using Model = std::unique_ptr<tl_model, Deleter>;
using Provider = std::unique_ptr<tl_provider, Deleter>;
using Lut = std::unique_ptr<tl_lut, Deleter>;
using Adjustment = std::unique_ptr<tl_adjustment, Deleter>;

/// Takes ownership of a tl_buffer and returns its bytes.
inline std::string take(tl_buffer& buffer) {
    std::string out(buffer.data ? buffer.data : "", buffer.size);
    tl_buffer_free(&buffer);
    return out;
}

class ImageList {
public:
    ImageList() = default;
    explicit ImageList(const std::string& dir) { check(tl_image_read_directory(dir.c_str(), &items_, &count_)); }
    ImageList(const ImageList&) = delete;
    ImageList& operator=(const ImageList&) = delete;
    ~ImageList() { tl_image_list_free(items_, count_); }

    tl_image* const* data() const noexcept { return items_; }
    std::size_t size() const noexcept { return count_; }
    void truncate(std::size_t n) {
        for (std::size_t i = n; i < count_; ++i) tl_image_free(items_[i]), items_[i] = nullptr;
        if (n < count_) count_ = n;
    }

private:
    tl_image** items_ = nullptr;
    std::size_t count_ = 0;
};

inline Provider open_provider(const std::string& store_path) {
    tl_provider* p = nullptr;
    check(store_path.empty() ? tl_provider_toy(&p) : tl_provider_load_store(store_path.c_str(), &p));
    return Provider(p);
}

inline Model open_model(const std::string& path) {
    tl_model* m = nullptr;
    check(tl_model_load(path.c_str(), &m));
    return Model(m);
}

inline Image open_image(const std::string& path) {
    tl_image* i = nullptr;
    check(tl_image_read(path.c_str(), &i));
    return Image(i);
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        if (end > pos) out.push_back(text.substr(pos, end - pos));
        pos = end + 1;
    }
    return out;
}

}  // namespace tonelut_tools
