// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <string>

#include "rome/estimators.hpp"

namespace rome::model_io {

std::string fit_config_to_json(const estimators::FitConfig& config);
estimators::FitConfig fit_config_from_json(const std::string& json_text);

std::string model_to_json(const estimators::RomeModel& model);
estimators::RomeModel model_from_json(const std::string& json_text);

void save_model(const std::string& path, const estimators::RomeModel& model);
estimators::RomeModel load_model(const std::string& path);

}  // namespace rome::model_io
