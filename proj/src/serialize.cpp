#include "reuse_lab/serialize.hpp"

namespace reuse_lab {

using nlohmann::json;

json to_json(const Problem& problem) {
  const auto eig = problem.spectrum().eigenvalues();
  const auto truth = problem.ground_truth();
  const auto init = problem.init();
  return json{{"eigenvalues", std::vector<double>(eig.begin(), eig.end())},
              {"ground_truth", std::vector<double>(truth.begin(), truth.end())},
              {"noise_std", problem.noise_std()},
              {"init", std::vector<double>(init.begin(), init.end())},
              {"data_bound", problem.data_bound()}};
}

Problem problem_from_json(const json& doc) {
  try {
    std::vector<double> init;
    if (doc.contains("init")) init = doc.at("init").get<std::vector<double>>();
    return Problem(Spectrum(doc.at("eigenvalues").get<std::vector<double>>()),
                   doc.at("ground_truth").get<std::vector<double>>(), doc.at("noise_std").get<double>(),
                   std::move(init), doc.value("data_bound", 0.0));
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed problem document: ") + e.what());
  }
}

json to_json(const ZipfModel& model) {
  if (model.law() == ZipfLaw::Explicit) {
    const auto p = model.probabilities();
    const auto s = model.scales();
    return json{{"law", "explicit"},
                {"probabilities", std::vector<double>(p.begin(), p.end())},
                {"scales", std::vector<double>(s.begin(), s.end())}};
  }
  return json{{"law", to_string(model.law())}, {"a", model.a()}, {"b", model.b()}, {"d", model.dimension()}};
}

ZipfModel zipf_model_from_json(const json& doc) {
  try {
    const ZipfLaw law = zipf_law_from_string(doc.at("law").get<std::string>());
    if (law == ZipfLaw::Explicit)
      return ZipfModel(doc.at("probabilities").get<std::vector<double>>(),
                       doc.at("scales").get<std::vector<double>>());
    return make_zipf(law, doc.at("a").get<double>(), doc.at("b").get<double>(),
                     doc.at("d").get<std::size_t>());
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed Zipf model document: ") + e.what());
  }
}

}  // namespace reuse_lab
