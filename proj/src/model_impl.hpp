#pragma once

#include <memory>

#include "flowfl/learner.hpp"

namespace flowfl::learner::detail {

std::unique_ptr<Model> make_lstm(const ArchDescriptor& arch);
std::unique_ptr<Model> make_linear(const ArchDescriptor& arch);
std::size_t lstm_param_count(const ArchDescriptor& arch);

}  // namespace flowfl::learner::detail
