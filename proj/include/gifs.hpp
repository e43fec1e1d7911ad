#pragma once

// Core library: point sets, finite IFS, GIFS, measures, transport, chaos game.
// The file formats and the command-line front end live under gifs/io/ and
// need nlohmann_json (and OpenSSL plus Boost.Program_options for the CLI).

#include "gifs/chaos.hpp"
#include "gifs/errors.hpp"
#include "gifs/gifs_system.hpp"
#include "gifs/grid.hpp"
#include "gifs/ifs.hpp"
#include "gifs/ledger.hpp"
#include "gifs/linalg.hpp"
#include "gifs/markov.hpp"
#include "gifs/measure.hpp"
#include "gifs/metric.hpp"
#include "gifs/nearest.hpp"
#include "gifs/point_set.hpp"
#include "gifs/schedule.hpp"
#include "gifs/transport.hpp"
