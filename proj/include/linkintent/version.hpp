#pragma once

#define LINKINTENT_VERSION "0.1.0"
