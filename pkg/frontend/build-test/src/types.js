/** Shared types for the cutout UI and its API client. */
export {};
