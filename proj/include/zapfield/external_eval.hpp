#pragma once

#include <stdexcept>
#include <string>

#include "zapfield/d2r.hpp"

namespace zapfield::external_eval {

struct EvaluatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// HTTP POST of a multipart body with fields `image` (PNG) and `prompt`; the
// reply's first word, case-folded, must be "clustering" or "scattering".
// Anything else, plus network failures and timeouts, raises EvaluatorError.
d2r::BehaviorLabel query_external_evaluator(const std::string& png_image,
                                            const std::string& instruction,
                                            const std::string& endpoint,
                                            int timeout_seconds = 30);

// first whitespace-delimited token, case-folded, trailing punctuation stripped
std::string first_word(const std::string& reply);

}  // namespace zapfield::external_eval
