import { ExplorerApp } from "./app";
import "./style.css";

const root = document.getElementById("app");
if (root) {
  void new ExplorerApp(root).start();
}
