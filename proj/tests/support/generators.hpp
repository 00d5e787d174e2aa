#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "craql/minilang.hpp"

namespace craql::testgen {

/// One method whose body opens `depth` blocks, each declaring a local.
std::string nested_blocks_source(int depth);

/// `methods` methods of the form `void mK() { { } }`: two blocks each.
std::string paired_blocks_source(int methods);

/// Random MiniLang compilation unit exercising every statement kind.
std::string random_program(std::mt19937& rng, int classes = 2);

/// `files` random compilation units from one seed, named Gen000.mj, ...
std::vector<minilang::SourceInput> random_corpus(std::uint32_t seed, int files);

/// Random files until at least `min_lines` lines in total.
std::vector<minilang::SourceInput> sized_corpus(std::uint32_t seed, std::size_t min_lines);

std::size_t count_lines(const std::vector<minilang::SourceInput>& files);

}  // namespace craql::testgen
