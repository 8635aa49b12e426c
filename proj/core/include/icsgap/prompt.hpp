#pragma once

#include <string>

#include "icsgap/attack_ingest.hpp"

namespace icsgap {

struct Prompt {
    std::string system;
    std::string user;
};

// Observable-extraction system message. Identical for every record.
const std::string& system_prompt();

// sha256 of the system message.
const std::string& prompt_version();

// The user message is the record's clean description text.
Prompt build_prompt(const ProcedureRecord& record);

}  // namespace icsgap
