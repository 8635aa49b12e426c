#pragma once

#include <string>
#include <utility>
#include <vector>

namespace icsgap::detail {

struct HttpResponse {
    int status = 0;  // 0 when the request never completed
    std::string body;
    std::string error;
};

using Headers = std::vector<std::pair<std::string, std::string>>;

HttpResponse http_get(const std::string& url, double timeout_s);
HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const Headers& headers, double timeout_s);

bool is_url(const std::string& s);

}  // namespace icsgap::detail
