#include "oanade/fetch.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include "oanade/errors.hpp"

namespace oanade {

namespace {

std::size_t append_body(char* data, std::size_t size, std::size_t count, void* user) {
    static_cast<std::string*>(user)->append(data, size * count);
    return size * count;
}

std::string download(const std::string& url) {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw FetchError("fetch: curl initialisation failed");
    std::string body;
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 10L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &append_body);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK) throw FetchError("fetch: " + url + ": " + curl_easy_strerror(rc));
    return body;
}

std::size_t count_rows(const std::string& body) {
    std::size_t rows = 0;
    bool has_content = false;
    for (char c : body) {
        if (c == '\n') {
            rows += has_content;
            has_content = false;
        } else if (c != ' ' && c != '\t' && c != '\r') {
            has_content = true;
        }
    }
    return rows + has_content;
}

}  // namespace

void fetch_dataset(const FetchRequest& request) {
    static const std::array<const char*, 3> files{"train.txt", "valid.txt", "test.txt"};
    std::string base = request.base_url;
    if (!base.empty() && base.back() != '/') base += '/';

    std::array<std::string, 3> bodies;
    for (std::size_t i = 0; i < files.size(); ++i) bodies[i] = download(base + files[i]);

    if (request.expected_rows) {
        const std::array<std::size_t, 3> expected{request.expected_rows->train, request.expected_rows->valid,
                                                  request.expected_rows->test};
        for (std::size_t i = 0; i < files.size(); ++i) {
            const std::size_t found = count_rows(bodies[i]);
            if (found != expected[i]) {
                throw FetchError(std::string("fetch: ") + files[i] + ": expected " + std::to_string(expected[i]) +
                                 " rows, found " + std::to_string(found));
            }
        }
    }

    std::filesystem::create_directories(request.dir);
    std::array<std::filesystem::path, 3> temps;
    try {
        for (std::size_t i = 0; i < files.size(); ++i) {
            temps[i] = request.dir / (std::string(files[i]) + ".part");
            std::ofstream out(temps[i], std::ios::binary | std::ios::trunc);
            out << bodies[i];
            if (!out.flush()) throw FetchError(std::string("fetch: cannot write ") + temps[i].string());
        }
        for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(temps[i], request.dir / files[i]);
    } catch (...) {
        for (const auto& t : temps) {
            std::error_code ec;
            if (!t.empty()) std::filesystem::remove(t, ec);
        }
        throw;
    }
}

}  // namespace oanade
