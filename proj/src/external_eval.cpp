#include "zapfield/external_eval.hpp"

#include <cctype>

#include <httplib.h>

namespace zapfield::external_eval {

std::string first_word(const std::string& reply) {
    size_t begin = 0;
    while (begin < reply.size() && std::isspace(static_cast<unsigned char>(reply[begin]))) ++begin;
    size_t end = begin;
    while (end < reply.size() && !std::isspace(static_cast<unsigned char>(reply[end]))) ++end;
    std::string word;
    for (size_t i = begin; i < end; ++i) {
        const unsigned char c = static_cast<unsigned char>(reply[i]);
        if (std::isalpha(c)) word.push_back(static_cast<char>(std::tolower(c)));
    }
    return word;
}

d2r::BehaviorLabel query_external_evaluator(const std::string& png_image,
                                            const std::string& instruction,
                                            const std::string& endpoint,
                                            int timeout_seconds) {
    const size_t scheme = endpoint.find("://");
    if (scheme == std::string::npos) throw EvaluatorError("malformed endpoint URL: " + endpoint);
    const size_t path_start = endpoint.find('/', scheme + 3);
    const std::string base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);

    httplib::MultipartFormDataItems items = {
        {"image", png_image, "plot.png", "image/png"},
        {"prompt", instruction, "", "text/plain; charset=utf-8"},
    };
    auto res = client.Post(path, items);
    if (!res) throw EvaluatorError("external evaluator request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw EvaluatorError("external evaluator returned HTTP " + std::to_string(res->status));

    const std::string word = first_word(res->body);
    if (word == "clustering") return d2r::BehaviorLabel::Clustering;
    if (word == "scattering") return d2r::BehaviorLabel::Scattering;
    throw EvaluatorError("external evaluator reply outside the closed label set: '" + word + "'");
}

}  // namespace zapfield::external_eval
