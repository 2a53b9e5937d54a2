import { CutoutApp } from "./ui.js";

window.addEventListener("DOMContentLoaded", () => {
  new CutoutApp().start();
});
