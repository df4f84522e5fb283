#include "kgprobe/http.hpp"

#include "httplib.h"
#include "kgprobe/errors.hpp"

namespace kgprobe {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint '" + url + "' has no scheme");
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpResponse post_json(const std::string& url, const nlohmann::json& body,
                       const std::map<std::string, std::string>& headers, std::chrono::seconds timeout) {
    const auto target = split_url(url);
    httplib::Client client(target.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(target.path, h, body.dump(), "application/json");
    if (!res) throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()), 1);
    if (res->status >= 500 || res->status == 429)
        throw TransportError("POST " + url + " returned status " + std::to_string(res->status), 1);
    return {res->status, res->body};
}

const nlohmann::json& at_path(const nlohmann::json& doc, const std::string& path) {
    const auto pointer = path.empty() || path.front() != '/' ? "/" + path : path;
    return doc.at(nlohmann::json::json_pointer(pointer));
}

}  // namespace kgprobe
