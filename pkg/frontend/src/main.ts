import { ApiClient } from './api.js';
import { Workbench } from './app.js';

const base = new URLSearchParams(window.location.search).get('api') ?? '';
const workbench = new Workbench(new ApiClient(base));
document.getElementById('app')?.appendChild(workbench.root);
void workbench.start();
