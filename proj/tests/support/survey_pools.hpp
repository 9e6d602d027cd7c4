#pragma once

#include <array>
#include <string>

#include "sapgan/data/image_io.hpp"
#include "sapgan/service/survey_service.hpp"
#include "temp_dir.hpp"

// Three image pools plus a response CSV path inside one scratch directory.
struct SurveyPools {
  TempDir dir{"survey"};

  explicit SurveyPools(std::array<int, 3> counts = {10, 10, 10}) {
    const char* names[3] = {"human", "baseline", "sapgan"};
    for (int s = 0; s < 3; ++s) {
      std::filesystem::create_directories(dir / names[s]);
      for (int i = 0; i < counts[s]; ++i) {
        // Same file names in every pool so ids cannot lean on names alone.
        sapgan::data::RawImage img(4, 4, 3, static_cast<std::uint8_t>(s * 60 + i));
        sapgan::data::save_image(img, dir / names[s] / ("img" + std::to_string(i) + ".png"));
      }
    }
  }

  sapgan::service::SurveyOptions options(std::uint64_t seed = 1) const {
    sapgan::service::SurveyOptions o;
    o.pools = {dir / "human", dir / "baseline", dir / "sapgan"};
    o.csv_path = dir / "responses.csv";
    o.seed = seed;
    o.clock = [] { return std::string("2024-05-01T12:00:00Z"); };
    return o;
  }
};
