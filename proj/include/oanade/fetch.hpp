#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "oanade/dataset.hpp"

namespace oanade {

struct FetchRequest {
    std::string base_url;  // train.txt, valid.txt and test.txt are fetched relative to this
    std::filesystem::path dir;
    std::optional<SplitSizes> expected_rows;
};

// Downloads the three split files into `dir`. Nothing is written unless every
// download succeeds and the row counts match; throws FetchError otherwise.
void fetch_dataset(const FetchRequest& request);

}  // namespace oanade
