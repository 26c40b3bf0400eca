import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the walkthrough test boots the real HTTP service
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
