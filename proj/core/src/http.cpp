#include "http.hpp"

#include <httplib.h>

#include "icsgap/common.hpp"

namespace icsgap::detail {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("not a URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

void configure(httplib::Client& cli, double timeout_s) {
    auto secs = static_cast<time_t>(timeout_s);
    auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    cli.set_follow_location(true);
}

HttpResponse convert(const httplib::Result& res) {
    HttpResponse out;
    if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
    }
    out.status = res->status;
    out.body = res->body;
    return out;
}

}  // namespace

bool is_url(const std::string& s) {
    return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0;
}

HttpResponse http_get(const std::string& url, double timeout_s) {
    auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    configure(cli, timeout_s);
    return convert(cli.Get(parts.path));
}

HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const Headers& headers, double timeout_s) {
    auto parts = split_url(url);
    httplib::Client cli(parts.origin);
    configure(cli, timeout_s);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    return convert(cli.Post(parts.path, h, body, content_type));
}

}  // namespace icsgap::detail
