export * from "./blob.js";
export * from "./rng.js";
export * from "./samples.js";
export * from "./multibet.js";
export * from "./slider.js";
export * from "./logger.js";
export * from "./views.js";
export * from "./api.js";
export * from "./taskview.js";
export * from "./replay.js";
